"""Finite-element reference model of the rotating cantilever."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import bending_scale
from spinbeam.errors import InvalidParameterError
from spinbeam.oracle_fe import (FeBeamMesh, fe_in_plane_frequencies,
                                fe_out_of_plane_frequencies)


class TestMesh:
    def test_axial_force_profile(self, boom):
        mesh = FeBeamMesh(boom, 10, spin=0.5, tip_mass=5.0, offset=2.0)
        # tip condition and monotone decay toward the tip
        assert mesh.axial_force(boom.l) == pytest.approx(5.0 * 52.0 * 0.25)
        x = np.linspace(0, boom.l, 50)
        N = mesh.axial_force(x)
        assert np.all(np.diff(N) <= 0)

    def test_quadratic_spin_dependence(self, boom):
        m1 = FeBeamMesh(boom, 4, spin=1.0, tip_mass=2.0, offset=1.0)
        m3 = FeBeamMesh(boom, 4, spin=3.0, tip_mass=2.0, offset=1.0)
        x = np.linspace(0, boom.l, 7)
        assert_allclose(m3.axial_force(x), 9.0 * m1.axial_force(x))

    def test_validation(self, boom):
        with pytest.raises(InvalidParameterError):
            FeBeamMesh(boom, 0, spin=0.0)
        with pytest.raises(InvalidParameterError):
            FeBeamMesh(boom, 4, spin=0.0, tip_mass=-1.0)


class TestOutOfPlane:
    def test_classic_cantilever(self, boom):
        sc = bending_scale(boom, "z")
        f = fe_out_of_plane_frequencies(boom, 0.0, n_elements=20)
        assert_allclose(f[:3] * sc, [3.5160, 22.0345, 61.697], rtol=1e-3)

    @pytest.mark.parametrize("eta,expected", [
        (3.0, 4.7973), (6.0, 7.3604), (12.0, 13.1702)])
    def test_spinning_reference_column(self, boom, eta, expected):
        sc = bending_scale(boom, "z")
        f = fe_out_of_plane_frequencies(boom, eta / sc, n_elements=40)
        assert f[0] * sc == pytest.approx(expected, rel=1e-4)

    def test_h_convergence(self, boom):
        sc = bending_scale(boom, "z")
        f20 = fe_out_of_plane_frequencies(boom, 6.0 / sc, n_elements=20)[:3]
        f40 = fe_out_of_plane_frequencies(boom, 6.0 / sc, n_elements=40)[:3]
        assert np.all(np.abs(f40 - f20) / f20 < 5e-4)


class TestInPlane:
    def test_no_spin_matches_out_of_plane(self, boom):
        fy = fe_in_plane_frequencies(boom, 0.0, n_elements=15)
        fz = fe_out_of_plane_frequencies(boom, 0.0, n_elements=15)
        assert_allclose(fy, fz, rtol=1e-12)

    def test_softened_reference_value(self, boom):
        sc = bending_scale(boom, "y")
        f = fe_in_plane_frequencies(boom, 6.0 / sc, n_elements=40)
        assert f[0] * sc == pytest.approx(4.2625, rel=5e-3)

    def test_in_plane_below_out_of_plane(self, boom):
        sc = bending_scale(boom, "y")
        omega = 12.0 / sc
        fy = fe_in_plane_frequencies(boom, omega, n_elements=30)[0]
        fz = fe_out_of_plane_frequencies(boom, omega, n_elements=30)[0]
        assert fy < fz
        # softening removes exactly the squared spin rate
        assert np.sqrt(fz**2 - omega**2) == pytest.approx(fy, rel=1e-9)

    def test_tip_mass_case(self, boom):
        # 10.4864 is the converged tip-mass ratio, confirmed independently
        # by the refined two-port element chains
        sc = bending_scale(boom, "y")
        omega = 10.0 / sc
        fy = fe_in_plane_frequencies(boom, omega, tip_mass=boom.mass,
                                     n_elements=40)[0]
        fz = fe_out_of_plane_frequencies(boom, omega, tip_mass=boom.mass,
                                         n_elements=40)[0]
        assert fz * sc == pytest.approx(10.4864, rel=1e-4)
        assert np.sqrt(fz**2 - omega**2) == pytest.approx(fy, rel=1e-9)
