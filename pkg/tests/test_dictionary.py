import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bird import MDCTDictionary, derive_stream
from bird._validation import ValidationError
from bird.dictionary import Atom, SubdictionarySelection, decode_atom_id, encode_atom_id
from oracles import naive_atom, naive_basis, naive_selection_matrix


def test_single_basis_count():
    D = MDCTDictionary(scales=(32,), n=1024, shift_granularity=1)
    assert D.n_atoms == 1024
    assert D.subdictionary_size == 1024


def test_default_scales_count():
    D = MDCTDictionary(scales=(32, 64, 128, 256, 512, 1024), n=8192, shift_granularity=8)
    assert D.n_atoms == 6 * 8192 * 8
    # enumeration: atoms per shifted basis, summed over scales and offsets
    count = sum((D.padded_length // (L // 2)) * (L // 2) for L in D.scales) * D.shift_granularity
    assert count == 393216
    assert D.subdictionary_size == D.n_atoms // D.shift_granularity


@pytest.mark.parametrize("kwargs", [
    dict(scales=(31,), n=1024),
    dict(scales=(32,), n=16),
    dict(scales=(32,), n=1024, shift_granularity=0),
    dict(scales=(32, 32), n=1024),
    dict(scales=(126, 122), n=256),
])
def test_invalid_construction(kwargs):
    with pytest.raises(ValidationError):
        MDCTDictionary(**kwargs)


@given(st.integers(0, 100), st.integers(0, 4095), st.integers(0, 2**20 - 1), st.integers(0, 2**24 - 1))
def test_atom_id_round_trip(s, i, k, f):
    atom = Atom(s, i, k, f)
    assert decode_atom_id(encode_atom_id(s, i, k, f)) == atom
    assert atom.id == encode_atom_id(s, i, k, f)


def test_atom_id_order_matches_columns(small_dict):
    sel = SubdictionarySelection((1, 2, 3))
    table = small_dict.analyze(np.zeros(small_dict.n), sel)
    ids = [table.atom_at(c).id for c in range(len(table))]
    assert ids == sorted(ids)
    assert len(set(ids)) == len(ids)


def test_synthesize_unit_norm(small_dict):
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = int(rng.integers(len(small_dict.scales)))
        h = small_dict.hops[s]
        atom = Atom(s, int(rng.integers(small_dict.shift_granularity)),
                    int(rng.integers(small_dict.padded_length // h)), int(rng.integers(h)))
        assert abs(np.linalg.norm(small_dict.synthesize_atom(atom)) - 1.0) <= 1e-12


def test_atom_support_confined(small_dict):
    atom = Atom(2, 0, 3, 0)
    w = small_dict.synthesize_atom(atom)
    L = small_dict.scales[2]
    start = 3 * L // 2
    assert np.all(w[:start] == 0) and np.all(w[start + L:] == 0)
    assert np.count_nonzero(w) == L


def test_same_basis_atoms_orthogonal(small_dict):
    a = small_dict.synthesize_atom(Atom(1, 2, 3, 1))
    b = small_dict.synthesize_atom(Atom(1, 2, 4, 1))
    c = small_dict.synthesize_atom(Atom(1, 2, 3, 2))
    assert abs(a @ b) <= 1e-10 and abs(a @ c) <= 1e-10
    # oracle agreement
    L = small_dict.scales[1]
    off = small_dict.shift_offsets[1][2]
    np.testing.assert_allclose(a, naive_atom(small_dict.padded_length, L, off, 3, 1), atol=1e-13)


def test_naive_basis_is_orthonormal():
    B = naive_basis(64, 16, 3)
    np.testing.assert_allclose(B @ B.T, np.eye(64), atol=1e-12)


def test_analyze_matches_naive(small_dict, rng):
    r = rng.standard_normal(small_dict.n)
    for _ in range(5):
        sel = small_dict.draw_subdictionary(rng)
        naive = naive_selection_matrix(small_dict, sel) @ small_dict.pad(r)
        fast = small_dict.analyze(r, sel).values[0]
        assert np.max(np.abs(fast - naive)) <= 1e-10 * np.linalg.norm(r)


def test_analyze_atom_self(small_dict):
    atom = Atom(0, 1, 5, 2)
    r = small_dict.synthesize_atom(atom)
    sel = SubdictionarySelection((1, 0, 0))
    table = small_dict.analyze(r, sel)
    col, val = table.argmax()
    assert table.atom_at(col) == atom
    assert abs(val - 1.0) <= 1e-10
    own = table.values[0, table.offsets[0]:table.offsets[1]].copy()
    own[col] = 0.0
    assert np.max(np.abs(own)) <= 1e-10


def test_analyze_zero(small_dict):
    table = small_dict.analyze(np.zeros(small_dict.n), small_dict.all_selections()[0])
    assert not np.any(table.values)


def test_parseval_single_scale(rng):
    D = MDCTDictionary(scales=(16,), n=128, shift_granularity=1)
    r = rng.standard_normal(128)
    t = D.analyze(r, D.all_selections()[0]).values[0]
    assert abs(np.sum(t**2) - r @ r) <= 1e-10 * (r @ r)


def test_adjoint_and_identity(small_dict, rng):
    y = rng.standard_normal(small_dict.padded_length)
    for s in range(len(small_dict.scales)):
        for i in range(small_dict.shift_granularity):
            a = small_dict.analyze_basis(y, s, i)[0]
            alpha = rng.standard_normal(a.shape)
            lhs = np.sum(a * alpha)
            rhs = y @ small_dict.synthesize_basis(alpha, s, i)
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
            back = small_dict.synthesize_basis(a, s, i)
            assert np.linalg.norm(back - y) <= 1e-10 * np.linalg.norm(y)


def test_selection_size_and_coverage(small_dict):
    sels = small_dict.all_selections()
    assert len(sels) == small_dict.shift_granularity
    ids = set()
    for sel in sels:
        t = small_dict.analyze(np.zeros(small_dict.n), sel)
        assert len(t) == small_dict.n_atoms // small_dict.shift_granularity
        ids.update(t.atom_at(c).id for c in range(len(t)))
    assert len(ids) == small_dict.n_atoms


def test_analyze_all_matches_selections(small_dict, rng):
    r = rng.standard_normal(small_dict.n)
    full = small_dict.analyze_all(r)[0]
    assert full.size == small_dict.n_atoms
    parts = np.concatenate([small_dict.analyze(r, s).values[0] for s in small_dict.all_selections()])
    np.testing.assert_allclose(np.sort(full), np.sort(parts), atol=1e-12)


def test_g1_full_cover():
    D = MDCTDictionary(scales=(8, 16), n=64, shift_granularity=1)
    sel = D.draw_subdictionary(np.random.default_rng(0))
    assert sel.shift_indices == (0, 0)
    assert len(D.analyze(np.zeros(64), sel)) == D.n_atoms


def test_draw_deterministic(small_dict):
    a = [small_dict.draw_subdictionary(derive_stream(5, 0)) for _ in range(3)]
    assert len(set(a)) == 1


def test_draw_uniform():
    D = MDCTDictionary(scales=(8, 16, 32), n=64, shift_granularity=8)
    rng = derive_stream(7, 0)
    draws = np.array([D.draw_subdictionary(rng).shift_indices for _ in range(10_000)])
    expected = 10_000 / 8
    sigma = np.sqrt(10_000 * (1 / 8) * (7 / 8))
    for s in range(3):
        counts = np.bincount(draws[:, s], minlength=8)
        assert np.all(np.abs(counts - expected) <= 3 * sigma)


def test_reconstruct_linearity(small_dict):
    atom = Atom(1, 0, 2, 3)
    assert not np.any(small_dict.reconstruct([]))
    two = small_dict.reconstruct([(atom, 2.0)])
    assert abs(np.linalg.norm(two) - 2.0) <= 1e-12
    twice = small_dict.reconstruct([(atom, 0.5), (atom.id, 1.25)])
    np.testing.assert_allclose(twice, small_dict.reconstruct([(atom, 1.75)]), atol=1e-15)


def test_invalid_atom(small_dict):
    with pytest.raises(ValidationError):
        small_dict.synthesize_atom(Atom(0, 0, 0, small_dict.hops[0]))
    with pytest.raises(ValidationError):
        small_dict.reconstruct([(Atom(9, 0, 0, 0), 1.0)])


def test_length_mismatch(small_dict):
    with pytest.raises(ValidationError):
        small_dict.analyze(np.zeros(small_dict.n + 1), small_dict.all_selections()[0])


def test_padding_non_power_of_two():
    D = MDCTDictionary(scales=(8, 12), n=50, shift_granularity=3)
    assert D.padded_length >= 50 and D.padded_length % 24 == 0
    r = np.random.default_rng(1).standard_normal(50)
    sel = SubdictionarySelection((2, 1))
    naive = naive_selection_matrix(D, sel) @ D.pad(r)
    np.testing.assert_allclose(D.analyze(r, sel).values[0], naive, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_table_argmax(seed):
    D = MDCTDictionary(scales=(8, 16), n=32, shift_granularity=2)
    rng = np.random.default_rng(seed)
    t = D.analyze(rng.standard_normal(32), D.draw_subdictionary(rng))
    col, val = t.argmax()
    assert abs(val) == np.max(np.abs(t.values))
    assert len(t) == D.subdictionary_size
