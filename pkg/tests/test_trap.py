import numpy as np
import pytest

from atomchip.constants import BOHR_MAGNETON, GAUSS, MU_0, PLANCK
from atomchip.errors import SaddlePointError
from atomchip.fields import BiotSavartModel, field_jacobian
from atomchip.geometry import ChipLayout, CurrentConfig, WireSegmentPath, rb87_f2m2
from atomchip.trap import (
    PotentialDef, characterize_trap, find_trap_minimum, magnetic_potential,
    potential_at, trap_depth, trap_frequencies,
)


def harmonic_potential(species, freqs_hz, center=(0.0, 0.0, 0.0), axes=None):
    center = np.asarray(center, dtype=float)
    if axes is None:
        axes = np.eye(3)
    axes = np.asarray(axes)
    k = species.mass * (2.0 * np.pi * np.asarray(freqs_hz)) ** 2

    def energy(r):
        d = axes @ (np.asarray(r, dtype=float) - center)
        return float(0.5 * np.sum(k * d**2))

    return PotentialDef(energy=energy, species=species)


# ---------------------------------------------------------------------------
# potential_at
# ---------------------------------------------------------------------------

def test_zeeman_energy_one_gauss(thin_model, species):
    # mu_B * 1 G / h = 1.3996 MHz from the constants table
    pdef = magnetic_potential(thin_model, CurrentConfig(bias=(1e-4, 0, 0)), species)
    u = potential_at(pdef, (0, 200e-6, 0))
    assert u / PLANCK == pytest.approx(1.3996e6, rel=1e-4)


def test_zero_field_zero_potential(thin_model, species):
    pdef = magnetic_potential(thin_model, CurrentConfig(), species)
    assert potential_at(pdef, (0, 200e-6, 0)) == 0.0


def test_gravity_additivity(thin_model, species):
    cur = CurrentConfig(bias=(5 * GAUSS, 0, 0))
    pdef = magnetic_potential(thin_model, cur, species, gravity=True)
    delta = 10e-6
    du = potential_at(pdef, (0, 200e-6 + delta, 0)) - potential_at(pdef, (0, 200e-6, 0))
    assert du == pytest.approx(species.mass * 9.80665 * delta, rel=1e-9)


# ---------------------------------------------------------------------------
# find_trap_minimum
# ---------------------------------------------------------------------------

def test_thin_filament_height_oracle(thin_model, thin_currents, species):
    pdef = magnetic_potential(thin_model, thin_currents, species)
    tc = find_trap_minimum(pdef, (0, 150e-6, 0))
    oracle = MU_0 * 2.0 / (2.0 * np.pi * 24.8 * GAUSS)  # 161.29 um
    assert abs(tc.height_above_chip - oracle) < 1e-6


def test_finite_width_height_in_paper_window(paper_model, paper, species):
    _, currents, _ = paper
    pdef = magnetic_potential(paper_model, currents, species)
    tc = find_trap_minimum(pdef, (-42.5e-6, 150e-6, 0))
    assert 140e-6 < tc.height_above_chip < 165e-6
    assert abs(tc.minimum[0] - (-42.5e-6)) < 3e-6  # above the powered wire


def test_pure_quadrupole_bottom_field_zero(thin_model, thin_currents, species):
    # straight wire + transverse bias: 2D quadrupole line, |B| -> 0
    pdef = magnetic_potential(thin_model, thin_currents, species)
    tc = find_trap_minimum(pdef, (0, 150e-6, 0))
    assert tc.bottom_field < 1e-7  # < 1 mG


def test_seed_perturbation_invariance(paper_model, paper, species):
    _, currents, _ = paper
    pdef = magnetic_potential(paper_model, currents, species)
    ref = find_trap_minimum(pdef, (-42.5e-6, 150e-6, 0))
    for off in ((20e-6, 0, 0), (0, 20e-6, 0), (-20e-6, -20e-6, 20e-6)):
        tc = find_trap_minimum(pdef, np.array([-42.5e-6, 150e-6, 0.0]) + off)
        assert np.linalg.norm(np.asarray(tc.minimum) - np.asarray(ref.minimum)) < 0.1e-6


def test_thin_wire_height_property(species):
    # oracle: height = mu0 I / (2 pi B_bias) within 1% across settings
    wire = WireSegmentPath(name="w", channel="w",
                           nodes=((0, 0, -0.05), (0, 0, 0.05)),
                           width=1e-6, thickness=1e-6)
    model = BiotSavartModel(ChipLayout(wires=(wire,)), 1, 1)
    for current, bias_g in ((1.0, 15.0), (2.0, 24.8), (3.0, 40.0)):
        cur = CurrentConfig(dc={"w": current}, bias=(bias_g * GAUSS, 0, 0))
        pdef = magnetic_potential(model, cur, rb87_f2m2())
        seed_y = MU_0 * current / (2 * np.pi * bias_g * GAUSS)
        tc = find_trap_minimum(pdef, (0, seed_y * 1.1, 0))
        assert tc.height_above_chip == pytest.approx(seed_y, rel=0.01)


def test_bias_monotonicity(thin_model, species):
    # deeper bias: trap moves closer to the wire and the gradient grows
    heights, gradients = [], []
    for bias_g in (20.0, 24.8, 30.0, 36.0):
        cur = CurrentConfig(dc={"w": 2.0}, bias=(bias_g * GAUSS, 0, 0))
        pdef = magnetic_potential(thin_model, cur, species)
        tc = find_trap_minimum(pdef, (0, 120e-6, 0))
        heights.append(tc.height_above_chip)
        J = field_jacobian(thin_model, cur, tc.minimum)
        gradients.append(np.linalg.norm(J))
    assert all(a > b for a, b in zip(heights, heights[1:]))
    assert all(a < b for a, b in zip(gradients, gradients[1:]))


# ---------------------------------------------------------------------------
# trap_frequencies
# ---------------------------------------------------------------------------

def test_synthetic_harmonic_frequencies(species):
    pdef = harmonic_potential(species, (1000.0, 1000.0, 6.5))
    freqs, axes = trap_frequencies(pdef, (0, 0, 0))
    assert freqs[0] == pytest.approx(6.5, rel=1e-3)
    assert freqs[1] == pytest.approx(1000.0, rel=1e-3)
    assert freqs[2] == pytest.approx(1000.0, rel=1e-3)
    assert np.allclose(np.asarray(axes) @ np.asarray(axes).T, np.eye(3), atol=1e-10)
    # soft axis is z
    assert abs(axes[0][2]) > 0.999


def test_rotation_covariance(species):
    theta = np.radians(30.0)
    rot = np.array([
        [np.cos(theta), -np.sin(theta), 0.0],
        [np.sin(theta), np.cos(theta), 0.0],
        [0.0, 0.0, 1.0],
    ])
    base = harmonic_potential(species, (80.0, 400.0, 1500.0))
    rotated = harmonic_potential(species, (80.0, 400.0, 1500.0), axes=rot.T)
    f0, a0 = trap_frequencies(base, (0, 0, 0))
    f1, a1 = trap_frequencies(rotated, (0, 0, 0))
    assert np.allclose(f0, f1, rtol=1e-3)
    # the rotated soft axis is rot @ x_hat
    expect = rot @ np.array(a0[0])
    got = np.array(a1[0])
    assert min(np.linalg.norm(got - expect), np.linalg.norm(got + expect)) < 1e-4


def test_paper_trap_is_cigar_shaped(paper_model, paper, species):
    _, currents, _ = paper
    pdef = magnetic_potential(paper_model, currents, species)
    tc = characterize_trap(pdef, (-42.5e-6, 150e-6, 0))
    f_axial, f_t1, f_t2 = tc.frequencies
    assert f_t1 > 50 * f_axial and f_t2 > 50 * f_axial
    # soft axis along the wire (z)
    assert abs(tc.axes[0][2]) > 0.99


def test_hessian_vs_1d_parabola_fits(species):
    # independent estimator: fit U along each principal axis to a parabola
    wire = WireSegmentPath(name="w", channel="w",
                           nodes=((0, 0, -0.05), (0, 0, 0.05)),
                           width=1e-6, thickness=1e-6)
    model = BiotSavartModel(ChipLayout(wires=(wire,)), 1, 1)
    cur = CurrentConfig(dc={"w": 2.0}, bias=(24.8 * GAUSS, 0, 0.5 * GAUSS))
    pdef = magnetic_potential(model, cur, species)
    tc = find_trap_minimum(pdef, (0, 150e-6, 0))
    freqs, axes = trap_frequencies(pdef, tc.minimum)
    x0 = np.asarray(tc.minimum)
    for f_hess, axis in zip(freqs, axes):
        if f_hess == 0.0:
            continue
        # stay well inside the harmonic core (|B| flattens ~3 um out at 0.5 G)
        scale = 0.3e-6
        ts = np.linspace(-scale, scale, 21)
        us = [pdef.energy(x0 + t * np.asarray(axis)) for t in ts]
        c2 = np.polyfit(ts, us, 2)[0]
        f_fit = np.sqrt(2.0 * c2 / species.mass) / (2.0 * np.pi)
        assert f_fit == pytest.approx(f_hess, rel=0.01)


def test_saddle_detected(species):
    def energy(r):
        x, y, z = np.asarray(r, dtype=float)
        k = species.mass * (2 * np.pi * 100.0) ** 2
        return float(0.5 * k * (x**2 + y**2 - 0.5 * z**2))

    with pytest.raises(SaddlePointError):
        trap_frequencies(PotentialDef(energy=energy, species=species), (0, 0, 0))


# ---------------------------------------------------------------------------
# trap_depth
# ---------------------------------------------------------------------------

def test_depth_of_clipped_harmonic(species):
    u0 = 2.0e-27

    def energy(r):
        d = np.asarray(r, dtype=float)
        k = species.mass * (2 * np.pi * 500.0) ** 2
        return float(min(0.5 * k * np.sum(d**2), u0))

    pdef = PotentialDef(energy=energy, species=species)
    depth, lower_bound = trap_depth(pdef, (0, 0, 0), search_halfwidth=200e-6)
    assert depth == pytest.approx(u0, rel=1e-6)
    assert not lower_bound


def test_depth_unit_identity(paper_model, paper, species):
    _, currents, _ = paper
    pdef = magnetic_potential(paper_model, currents, species)
    tc = characterize_trap(pdef, (-42.5e-6, 150e-6, 0))
    assert tc.depth_equivalent_gauss == pytest.approx(
        tc.depth / BOHR_MAGNETON / 1e-4, rel=1e-12
    )


def test_no_minimum_reported_as_convergence_failure(species):
    # a uniformly sloping potential has no interior minimum: the search
    # either escapes the domain or never meets the gradient tolerance
    from atomchip.errors import ConvergenceError

    def energy(r):
        return float(1e-24 * np.asarray(r, dtype=float)[0])

    with pytest.raises(ConvergenceError):
        find_trap_minimum(PotentialDef(energy=energy, species=species),
                          (0.0, 100e-6, 0.0))


def test_depth_lower_bound_flag(species):
    # monotonically rising potential: every ray still climbs at the edge
    def energy(r):
        d = np.asarray(r, dtype=float)
        k = species.mass * (2 * np.pi * 500.0) ** 2
        return float(0.5 * k * np.sum(d**2))

    depth, lower_bound = trap_depth(PotentialDef(energy=energy, species=species),
                                    (0, 0, 0), search_halfwidth=100e-6)
    assert lower_bound
