from fractions import Fraction as F

import numpy as np
import pytest

from conftest import B1, B2, B3, B4, FIRST_COLUMN, PSI_B1, fr
from countmech import (
    CapacityError,
    InputError,
    PolytopeDescriptor,
    enumerate_scales,
    enumerate_vertices,
    in_F,
    in_U,
    is_extreme,
    verify_representation_theorems,
)
from countmech.oracle import enumerate_direct, enumerate_representation_vertices, format_fraction, vertices_to_json


def keys(mats):
    return {tuple(F(x) for x in np.asarray(M).ravel()) for M in mats}


@pytest.fixture(scope="module")
def n3():
    z = (F(1, 3),) * 3
    return {
        "F": PolytopeDescriptor("F", 3, 2, z),
        "RF": PolytopeDescriptor("RF", 3, 2, z),
        "U": PolytopeDescriptor("U", 3, 2),
        "RU": PolytopeDescriptor("RU", 3, 2),
    }


def test_descriptor_validation():
    with pytest.raises(InputError):
        PolytopeDescriptor("F", 3, 2)
    with pytest.raises(InputError):
        PolytopeDescriptor("U", 3, 2, (F(1, 3),) * 3)
    with pytest.raises(InputError):
        PolytopeDescriptor("X", 3, 2)
    with pytest.raises(InputError):
        PolytopeDescriptor("U", 3, 1)


def test_n1_single_vertex():
    for desc in (PolytopeDescriptor("F", 1, 2, (1,)), PolytopeDescriptor("U", 1, 2)):
        assert [M.tolist() for M in enumerate_vertices(desc)] == [[[1]]]


def test_capacity_guard():
    with pytest.raises(CapacityError):
        enumerate_vertices(PolytopeDescriptor("RF", 4, 2, (F(1, 4),) * 4))
    with pytest.raises(CapacityError):
        enumerate_vertices(PolytopeDescriptor("U", 5, 2))


def test_vertex_counts_n3(n3):
    counts = {k: len(enumerate_vertices(d)) for k, d in n3.items()}
    assert counts == {"F": 36, "RF": 78, "U": 27, "RU": 36}


def test_routes_agree(n3):
    for kind in ("F", "U"):
        rep = enumerate_vertices(n3[kind], route="representation")
        direct = enumerate_direct(n3[kind])
        assert keys(rep) == keys(direct)


def test_unpruned_matches_pruned(n3):
    for kind in ("RF", "RU"):
        assert keys(enumerate_representation_vertices(n3[kind], pruned=False)) == \
            keys(enumerate_representation_vertices(n3[kind]))


def test_support_bounds(n3):
    for B in enumerate_vertices(n3["RF"]):
        assert sum(1 for x in B.ravel() if x > 0) <= 3 + 3 - 1
    for B in enumerate_vertices(n3["RU"]):
        assert sum(1 for x in B.ravel() if x > 0) <= 3


def test_every_vertex_is_a_member_and_extreme(n3, lam2):
    z = list(n3["F"].z)
    for T in enumerate_vertices(n3["F"]):
        assert in_F(T, z, lam2) and is_extreme(T, lam2, z)
    for T in enumerate_vertices(n3["U"]):
        assert in_U(T, lam2) and is_extreme(T, lam2)


def test_named_matrices(n3):
    rf = keys(enumerate_vertices(n3["RF"]))
    assert keys([B1, B2, B3]) <= rf
    assert keys([PSI_B1]) <= keys(enumerate_vertices(n3["F"]))
    assert keys([B4]) <= keys(enumerate_vertices(n3["RU"]))
    assert keys([FIRST_COLUMN]) <= keys(enumerate_vertices(n3["U"]))


def test_named_images(n3, lam2, uniform3):
    psi = enumerate_scales(3, lam2).matrix
    assert np.array_equal(psi.dot(B1), PSI_B1) and np.array_equal(psi.dot(B2), PSI_B1)
    assert not is_extreme(psi.dot(B3), lam2, uniform3)
    assert np.array_equal(psi.dot(B4), FIRST_COLUMN)


@pytest.mark.parametrize("kind", ["F", "U"])
def test_representation_report(n3, kind):
    report = verify_representation_theorems(n3[kind])
    assert report.ok, report.failures
    assert report.surjective and report.non_extreme_images and report.collisions


def test_u_n4():
    assert len(enumerate_vertices(PolytopeDescriptor("U", 4, 2))) == 664


@pytest.mark.slow
def test_f_n4_uniform():
    assert len(enumerate_vertices(PolytopeDescriptor("F", 4, 2, (F(1, 4),) * 4))) == 1806


def test_nonuniform_fixed_point_vertices(lam2):
    z = (F(1, 2), F(1, 3), F(1, 6))
    desc = PolytopeDescriptor("F", 3, 2, z)
    rep = enumerate_vertices(desc, route="representation")
    assert keys(rep) == keys(enumerate_direct(desc))
    for T in rep:
        assert in_F(T, list(z), lam2)


def test_json_document(n3):
    doc = vertices_to_json(n3["U"], enumerate_vertices(n3["U"]))
    assert doc["count"] == 27 and doc["lambda"] == "2/1"
    assert [["1/1", "0/1", "0/1"]] * 3 in doc["vertices"]
    assert format_fraction(F(-3, 6)) == "-1/2"
