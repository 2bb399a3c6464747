"""
Test suite for L(1, chi): digamma kernel, closed forms and the independent routes
"""

import math

import numpy as np
import pytest
from scipy.special import digamma as scipy_digamma

from cyclomoment.errors import PrincipalCharacterError
from cyclomoment.numtheory.characters import DirichletCharacter, all_characters, character_group
from cyclomoment.numtheory.lfunc import (
    DIGAMMA_REL_ERR,
    LMethod,
    LOneValue,
    digamma,
    l_one,
    l_one_batch,
    l_one_digamma,
    l_one_series_oracle,
    l_one_table,
    psi_table,
)


class TestDigamma:
    """Test cases for psi on (0, 1]"""

    def test_matches_scipy(self):
        """Test the kernel against scipy.special.digamma across the interval"""
        x = np.linspace(1e-6, 1.0, 2001)
        ours = digamma(x)
        reference = scipy_digamma(x)
        assert np.all(np.abs(ours - reference) <= 4 * DIGAMMA_REL_ERR * np.abs(reference))

    def test_euler_constant(self):
        """Test psi(1) = -gamma"""
        assert abs(digamma(1.0) + np.euler_gamma) < 1e-14

    def test_half(self):
        """Test psi(1/2) = -gamma - 2 ln 2"""
        assert abs(digamma(0.5) - (-np.euler_gamma - 2 * math.log(2))) < 5e-14

    def test_domain(self):
        """Test arguments outside (0, 1] are refused"""
        with pytest.raises(ValueError):
            digamma(0.0)
        with pytest.raises(ValueError):
            digamma(1.5)
        with pytest.raises(ValueError):
            digamma(np.array([0.5, float("nan")]))

    def test_psi_table_layout(self):
        """Test entry 0 of the residue table holds psi(1)"""
        table = psi_table(7)
        assert abs(table[0] - digamma(1.0)) < 1e-15
        assert abs(table[3] - digamma(3 / 7)) < 1e-14
        assert not table.flags.writeable


class TestClosedForms:
    """Test cases for L(1, chi) values known in closed form"""

    def test_quadratic_mod_5(self, quadratic_mod_5):
        """Test L(1, chi_5) = 2 ln((1 + sqrt 5)/2) / sqrt 5"""
        expected = 2 / math.sqrt(5) * math.log((1 + math.sqrt(5)) / 2)
        result = l_one_digamma(quadratic_mod_5)
        assert abs(result.value - expected) < 1e-13
        assert result.method is LMethod.DIGAMMA
        assert result.abs_err < 1e-13

    def test_quadratic_mod_3(self):
        """Test L(1, chi_{-3}) = pi / (3 sqrt 3)"""
        chi = DirichletCharacter.of(character_group(3), (1,))
        assert abs(l_one_digamma(chi).value - math.pi / (3 * math.sqrt(3))) < 1e-13

    def test_quadratic_mod_4(self):
        """Test L(1, chi_{-4}) = pi / 4"""
        chi = DirichletCharacter.of(character_group(4), (1,))
        assert abs(l_one_digamma(chi).value - math.pi / 4) < 1e-13

    def test_even_character_mod_8(self):
        """Test L(1, chi_8) = ln(1 + sqrt 2) / sqrt 2"""
        chi = DirichletCharacter.of(character_group(8), (0, 1))
        assert abs(l_one_digamma(chi).value - math.log(1 + math.sqrt(2)) / math.sqrt(2)) < 1e-13

    def test_principal_character_refused(self):
        """Test the pole at s=1 raises for the principal character"""
        principal = all_characters(character_group(7))[0]
        with pytest.raises(PrincipalCharacterError):
            l_one_digamma(principal)
        with pytest.raises(PrincipalCharacterError):
            l_one(principal)
        with pytest.raises(PrincipalCharacterError):
            l_one_series_oracle(principal, 1000)


class TestRoutes:
    """Test cases comparing the digamma, induced, batch and series routes"""

    @pytest.mark.parametrize("q", [12, 15, 16, 45])
    def test_induced_route_matches_direct(self, q):
        """Test Euler-factor correction of the primitive value equals the direct formula"""
        for chi in all_characters(character_group(q))[1:]:
            direct = l_one_digamma(chi)
            induced = l_one(chi)
            assert abs(direct.value - induced.value) < 1e-12
            if chi.conductor < q:
                assert induced.method is LMethod.INDUCED

    @pytest.mark.parametrize("q", [7, 24, 49, 101, 105])
    def test_batch_table_matches_direct(self, q):
        """Test the FFT table agrees with one-character evaluation, in enumeration order"""
        table = l_one_table(q)
        assert math.isnan(table.values[0].real)
        for index, chi in enumerate(all_characters(character_group(q))):
            if chi.is_principal:
                continue
            assert abs(table.values[index] - l_one_digamma(chi).value) < 1e-12
            assert l_one_batch(chi).value == table.values[index]

    def test_conjugate_symmetry(self):
        """Test L(1, conj chi) = conj L(1, chi)"""
        for chi in all_characters(character_group(19))[1:]:
            assert abs(l_one(chi.conjugate()).value - np.conj(l_one(chi).value)) < 1e-13

    def test_nonvanishing(self):
        """Test |L(1, chi)| is bounded away from zero for all q up to 60"""
        for q in range(3, 61):
            values = l_one_table(q).values[1:]
            assert np.abs(values).min() > 1e-3

    @pytest.mark.parametrize("q", [5, 11, 12])
    def test_series_oracle_within_error(self, q):
        """Test the partial-summation oracle agrees within its reported error"""
        for chi in all_characters(character_group(q))[1:]:
            oracle = l_one_series_oracle(chi, 200_000)
            direct = l_one_digamma(chi)
            assert oracle.method is LMethod.SERIES
            assert abs(oracle.value - direct.value) <= oracle.abs_err + direct.abs_err + 1e-12

    @pytest.mark.parametrize("q", [97, 256, 360, 499])
    def test_series_oracle_at_a_million_terms(self, q):
        """Test the oracle truncated near 10^6 agrees with the digamma route to 1e-5"""
        for chi in all_characters(character_group(q))[1:]:
            assert abs(l_one_series_oracle(chi, 10**6).value - l_one_digamma(chi).value) <= 1e-5

    @pytest.mark.slow
    def test_series_oracle_every_modulus_to_500(self):
        """Test the oracle at N = 10^6 agrees with the digamma route for every q <= 500"""
        for q in range(3, 501):
            for chi in all_characters(character_group(q))[1:]:
                assert abs(l_one_series_oracle(chi, 10**6).value - l_one_digamma(chi).value) <= 1e-5, f"q={q}"

    def test_series_oracle_needs_a_period(self, quadratic_mod_5):
        """Test truncation below the modulus is refused"""
        with pytest.raises(ValueError):
            l_one_series_oracle(quadratic_mod_5, 4)

    def test_error_must_be_finite(self):
        """Test LOneValue rejects negative or infinite error bounds"""
        with pytest.raises(ValueError):
            LOneValue(1.0, -1.0, LMethod.DIGAMMA)
        with pytest.raises(ValueError):
            LOneValue(1.0, float("inf"), LMethod.DIGAMMA)
