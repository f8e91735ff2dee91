import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from macshaping.constellation import (PAM, QAM, Constellation, InvalidArgument,
                                      build_xor_classes, check_ambiguity_free,
                                      get_constellation, make_pam, make_qam16_gray,
                                      make_qam16_natural)


def test_make_pam_small():
    c = make_pam(1)
    assert c.points.real.tolist() == [-1, 1]
    assert c.labels.tolist() == [0, 1]
    assert make_pam(2).points.real.tolist() == [-3, -1, 1, 3]


def test_make_pam_16():
    c = make_pam(4)
    assert c.points.real.tolist() == list(range(-15, 16, 2))
    assert np.all(c.points.imag == 0)
    assert c.labels.tolist() == list(range(16))
    assert c.family == PAM and c.signal_dimensions == 1


@pytest.mark.parametrize("m", [0, 9, -1, 2.5])
def test_make_pam_rejects(m):
    with pytest.raises(InvalidArgument):
        make_pam(m)


def test_qam16_gray_layout():
    c = make_qam16_gray()
    assert len(set(c.points.tolist())) == 16
    assert sorted(c.labels.tolist()) == list(range(16))
    assert set(c.points.real) == {-3, -1, 1, 3} and set(c.points.imag) == {-3, -1, 1, 3}
    assert c.family == QAM and c.signal_dimensions == 2
    # nearest neighbours along each axis differ in exactly one bit
    lab = {z: v for z, v in zip(c.points.tolist(), c.labels.tolist())}
    for z, v in lab.items():
        for dz in (2, 2j):
            if z + dz in lab:
                assert bin(v ^ lab[z + dz]).count("1") == 1


def test_constellation_invariants():
    with pytest.raises(InvalidArgument):
        Constellation(np.array([1, 1], dtype=complex), np.array([0, 1]), PAM, 1)
    with pytest.raises(InvalidArgument):
        Constellation(np.array([-1, 1], dtype=complex), np.array([0, 0]), PAM, 1)


def test_get_constellation_ids():
    assert get_constellation("pam256").M == 256
    assert get_constellation("qam16-gray").family == QAM
    for bad in ("pam3", "pam512", "psk8"):
        with pytest.raises(InvalidArgument):
            get_constellation(bad)


def test_json_roundtrip():
    c = make_qam16_gray()
    d = Constellation.from_json(c.to_json())
    assert np.array_equal(d.points, c.points) and np.array_equal(d.labels, c.labels)


def test_xor_classes_one_bit():
    x = build_xor_classes(make_pam(1))
    cls = [{(k, l) for k, l, _ in entries} for entries in x.classes]
    assert cls == [{(0, 0), (1, 1)}, {(0, 1), (1, 0)}]


def test_xor_classes_16pam(x16):
    assert all(len(entries) == 16 for entries in x16.classes)
    assert len(x16.x_ab) == 256
    assert len(set(x16.x_ab.tolist())) == 256
    assert np.array_equal(x16.x_ab, x16.constellation.points[x16.k] + 1j * x16.constellation.points[x16.l])


@pytest.mark.parametrize("m", range(1, 9))
def test_partition_exhaustive(m):
    c = make_pam(m)
    x = build_xor_classes(c)
    M = c.M
    pairs = set(zip(x.k.tolist(), x.l.tolist()))
    assert len(pairs) == M * M == len(x.k)
    assert np.array_equal(np.bincount(x.cls), np.full(M, M))
    assert np.array_equal(c.labels[x.k] ^ c.labels[x.l], x.cls)


@given(st.integers(1, 6))
def test_xor_symmetry(m):
    x = build_xor_classes(make_pam(m))
    for i, entries in enumerate(x.classes):
        s = {(k, l) for k, l, _ in entries}
        assert s == {(l, k) for k, l in s}


@given(st.integers(1, 6), st.data())
def test_label_relabeling_permutes_classes(m, data):
    c = make_pam(m)
    const = data.draw(st.integers(0, c.M - 1))
    d = Constellation(c.points, c.labels ^ const, c.family, c.m)
    xc, xd = build_xor_classes(c), build_xor_classes(d)
    # XOR of two shifted labels is unchanged, so each class keeps its point multiset
    for i in range(c.M):
        assert sorted(xc.x_ab[xc.members(i)].tolist(), key=lambda z: (z.real, z.imag)) == \
            sorted(xd.x_ab[xd.members(i)].tolist(), key=lambda z: (z.real, z.imag))


@pytest.mark.parametrize("m", range(1, 9))
def test_pam_always_ambiguity_free(m):
    assert check_ambiguity_free(build_xor_classes(make_pam(m)))


def _collision_scan(c):
    # brute force over all ordered pair-of-pairs
    seen = {}
    for k, l in itertools.product(range(c.M), repeat=2):
        z = c.points[k] + c.points[l]
        seen.setdefault((z.real, z.imag), set()).add(int(c.labels[k] ^ c.labels[l]))
    return sum(len(v) > 1 for v in seen.values())


def test_qam_natural_labels_collide():
    c = make_qam16_natural()
    x = build_xor_classes(c)
    assert _collision_scan(c) > 0
    assert check_ambiguity_free(x) is False
    assert len(x.collisions) == 112


def test_qam_gray_collides_under_shared_constellation():
    # (1+j) + (1+j) = (3+j) + (-1+j): the first pair always lands in class 0,
    # the second never does, so no labeling of a shared constellation avoids it.
    c = make_qam16_gray()
    x = build_xor_classes(c)
    assert _collision_scan(c) > 0
    assert check_ambiguity_free(x) is False
    assert len(x.collisions) == 112
    alt = build_xor_classes(make_qam16_gray(q_high=True))
    assert check_ambiguity_free(alt) is False
