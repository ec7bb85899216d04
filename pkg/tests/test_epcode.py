from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffma import epcode, gf
from ffma.epcode import CodeConstructionError, EpCode
from ffma.gf import FfMatrix


@pytest.mark.parametrize("kappa", range(1, 7))
def test_ternary_orthogonal_gram_is_scalar(kappa):
    t = epcode.ternary_orthogonal(kappa)
    n = 2**kappa
    assert t.shape == (n, n)
    # each row has n nonzero entries, so T·T^T = n·I over GF(3)
    assert t @ t.T == gf.scale(n % 3, gf.identity(n, 3))
    assert epcode.is_row_orthogonal(t)


def test_ternary_orthogonal_rejects_kappa_zero():
    with pytest.raises(ValueError):
        epcode.ternary_orthogonal(0)


@pytest.mark.parametrize("name,code", sorted(epcode.shipped_codes().items()))
def test_uspm_rank_matches_exhaustive(name, code):
    assert epcode.check_uspm(code) == epcode.check_uspm_exhaustive(code)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.integers(1, 7), st.data())
def test_uspm_rank_matches_exhaustive_random_binary(M, m, data):
    vals = data.draw(st.lists(st.integers(0, 1), min_size=M * m, max_size=M * m))
    g = FfMatrix(np.array(vals).reshape(M, m), 2)
    if any(not r.any() for r in g.a):
        return  # a zero row would make the pair words identical
    code = epcode.scwep_from_generator(g)
    assert epcode.check_uspm(code) == epcode.check_uspm_exhaustive(code)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_uspm_rank_matches_exhaustive_random_ternary(M, m, data):
    vals = data.draw(st.lists(st.integers(0, 2), min_size=M * m, max_size=M * m))
    t = FfMatrix(np.array(vals).reshape(M, m), 3)
    if any(not r.any() for r in t.a):
        return
    code = epcode.ai_cwep_from_matrix(t)
    assert epcode.check_uspm(code) == epcode.check_uspm_exhaustive(code)


def test_exhaustive_limit():
    code = epcode.orthogonal_udep(epcode.EXHAUSTIVE_MAX_M + 1)
    with pytest.raises(ValueError):
        epcode.check_uspm_exhaustive(code)
    assert epcode.check_uspm(code) == epcode.UNIQUE


def test_families_and_modes():
    codes = epcode.shipped_codes()
    assert codes["ortho4"].family == epcode.ORTHO_UDEP
    assert codes["scwep_full_one"].family == epcode.S_CWEP
    assert codes["scwep_16_12"].family == epcode.S_CWEP
    assert codes["no_cwep_3x2"].family == epcode.NO_CWEP
    assert codes["ai_cwep_k2"].family == epcode.AI_CWEP
    assert epcode.classify_mode(codes["scwep_16_12"]) == epcode.MODE_CCMA
    assert epcode.classify_mode(codes["ortho4"]) == epcode.MODE_ORTHOGONAL
    assert epcode.classify_mode(codes["no_cwep_3x2"]) == epcode.MODE_NOMA
    assert epcode.loading_factor(codes["scwep_full_one"]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        epcode.classify_mode(Fraction(0))


def test_family_tag_must_match_structure():
    g1 = FfMatrix([[1, 1], [2, 1]], 3)
    with pytest.raises(CodeConstructionError):
        EpCode(gf.scale(2, g1), g1, epcode.S_CWEP)
    with pytest.raises(CodeConstructionError):
        EpCode(FfMatrix([[1, 0], [0, 1]], 3), g1, epcode.AI_CWEP)
    with pytest.raises(CodeConstructionError):
        EpCode(gf.zeros(2, 2, 3), g1, "bogus")
    with pytest.raises(CodeConstructionError):
        epcode.scwep_from_generator(g1)
    with pytest.raises(CodeConstructionError):
        epcode.ai_cwep_from_matrix(FfMatrix([[1]], 2))


def test_pair_words_must_differ():
    with pytest.raises(CodeConstructionError):
        epcode.scwep_from_generator(FfMatrix([[1, 0], [0, 0]], 2))


def test_pairs_and_word_selection():
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(1))
    pr = code.pairs[1]
    assert str(pr.word(0)) == "12" and str(pr.word(1)) == "21"
    assert str(pr) == "(12, 21)"
    with pytest.raises(ValueError):
        pr.word(2)


def test_complementary_blocks_of_ai_code_negate_ffsp():
    # for additive-inverse codes flipping every bit negates the FFSP word
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(2))
    blocks = epcode.all_blocks(code.M)
    w = epcode.ffsp(code, blocks)
    w_bar = epcode.ffsp(code, 1 - blocks)
    assert np.array_equal((w + w_bar) % 3, np.zeros_like(w))


def test_all_blocks_order():
    assert epcode.all_blocks(2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_self_correlations():
    code = epcode.ai_cwep_from_matrix(epcode.ternary_orthogonal(2))
    assert epcode.self_correlations(code) == [1, 1, 1, 1]
    assert epcode.self_correlations(epcode.orthogonal_udep(3)) == [1, 1, 1]


@pytest.mark.parametrize("name", sorted(epcode.shipped_codes()))
def test_codebook_text_roundtrip(name, tmp_path):
    code = epcode.shipped_codes()[name]
    path = tmp_path / f"{name}.ep"
    epcode.save(code, path)
    back = epcode.load(path)
    assert back == code and back.family == code.family


def test_codebook_header_errors():
    with pytest.raises(ValueError):
        epcode.from_text("S-CWEP 2 2\n")
    text = epcode.to_text(epcode.orthogonal_udep(2)).replace("ORTHO-UDEP 2 2 2", "ORTHO-UDEP 2 3 2")
    with pytest.raises(ValueError):
        epcode.from_text(text)
