import itertools

import pytest

from tsubspace.errors import ConstraintViolationError, InvalidModelError
from tsubspace.models import (
    MODEL_CODES,
    DimensionAssignment,
    enumerate_models,
    free_param_count,
    gaussian_param_count,
    parse_model,
)

from conftest import structural_param_count


class TestParseModel:
    def test_fully_unconstrained(self):
        spec = parse_model("UUUUU")
        assert (spec.a_constraint, spec.b_constraint, spec.d_orient_constraint,
                spec.dim_constraint, spec.nu_constraint) == ("U", "U", "U", "U", "U")

    def test_fully_constrained(self):
        spec = parse_model("CCCCC")
        assert spec.common_dim and spec.common_orientation and spec.common_nu

    def test_invalid_g_pattern(self):
        with pytest.raises(InvalidModelError, match="GCCC"):
            parse_model("GUUUU")

    def test_unknown_letter_names_position(self):
        with pytest.raises(InvalidModelError, match="position 2"):
            parse_model("UXUUU")

    def test_wrong_length(self):
        with pytest.raises(InvalidModelError):
            parse_model("UUU")

    def test_lowercase_accepted(self):
        assert parse_model("ccccc").code == "CCCCC"

    def test_unsupported_combination(self):
        # D orientation constrained without constrained dimension is not in the family
        with pytest.raises(InvalidModelError):
            parse_model("UUCUU")


class TestEnumerateModels:
    def test_count(self):
        assert len(enumerate_models()) == 28

    def test_first_is_fully_free(self):
        assert enumerate_models()[0].code == "UUUUU"

    def test_all_parse_and_distinct(self):
        codes = [s.code for s in enumerate_models()]
        assert len(set(codes)) == 28
        for code in codes:
            assert parse_model(code).code == code

    def test_nu_blocks(self):
        codes = [s.code for s in enumerate_models()]
        assert all(c.endswith("U") for c in codes[:14])
        assert all(c.endswith("C") for c in codes[14:])


class TestFreeParamCount:
    def test_uuuuu_worked_example(self):
        spec = parse_model("UUUUU")
        # rho 9, tau-bar 10, 3G 6, s 4
        assert free_param_count(spec, G=2, p=4, dims=(2, 2)) == 29

    def test_ccccc_worked_example(self):
        assert free_param_count(parse_model("CCCCC"), G=2, p=4, dims=(2, 2)) == 18

    def test_uuuuc_worked_example(self):
        assert free_param_count(parse_model("UUUUC"), G=2, p=4, dims=(2, 2)) == 28

    def test_gcccc_worked_example(self):
        # rho 14, tau 5, d 2, +3  (row: rho + tau + d + 3)
        assert free_param_count(parse_model("GCCCC"), G=3, p=4, dims=(2, 2, 2)) == 24

    def test_nu_pooling_difference(self):
        kw = dict(G=2, p=4, dims=(2, 2))
        assert (free_param_count(parse_model("CCCCU"), **kw)
                - free_param_count(parse_model("CCCCC"), **kw)) == 1
        assert (free_param_count(parse_model("UUUUU"), **kw)
                - free_param_count(parse_model("UUUUC"), **kw)) == 1

    def test_paper_rho_variant(self):
        base = free_param_count(parse_model("UUUUU"), 2, 4, (2, 2))
        paper = free_param_count(parse_model("UUUUU"), 2, 4, (2, 2), paper_rho=True)
        assert paper - base == 2  # Gp+G+1 vs Gp+G-1

    def test_common_dim_violation_rejected(self):
        with pytest.raises(ConstraintViolationError):
            free_param_count(parse_model("UUUCU"), 2, 5, (2, 3))

    def test_dim_out_of_range_rejected(self):
        with pytest.raises(ConstraintViolationError):
            free_param_count(parse_model("UUUUU"), 2, 4, (4, 2))

    def test_matches_structural_oracle_everywhere(self):
        # Every row, over a grid of G, p, and common d.
        for code in MODEL_CODES:
            spec = parse_model(code)
            for G, p, d in itertools.product((1, 2, 3), (4, 8), (1, 2, 3)):
                dims = (d,) * G
                assert free_param_count(spec, G, p, dims) == structural_param_count(
                    code, G, p, dims
                ), f"{code} G={G} p={p} d={d}"

    def test_unequal_dims_match_oracle(self):
        for code in MODEL_CODES:
            spec = parse_model(code)
            if spec.common_dim:
                continue
            dims = (1, 3)
            assert free_param_count(spec, 2, 6, dims) == structural_param_count(
                code, 2, 6, dims
            ), code

    def test_ordering_extremes(self):
        for G, p, d in itertools.product((1, 2, 3), (4, 8), (1, 2, 3)):
            dims = (d,) * G
            top = free_param_count(parse_model("UUUUU"), G, p, dims)
            bottom = free_param_count(parse_model("CCCCC"), G, p, dims)
            for code in MODEL_CODES:
                count = free_param_count(parse_model(code), G, p, dims)
                assert bottom <= count <= top, code

    def test_nu_constraint_always_saves_g_minus_one(self):
        for code in MODEL_CODES[:14]:
            sibling = code[:4] + "C"
            for G, p, d in itertools.product((1, 2, 3), (4, 8), (1, 2)):
                dims = (d,) * G
                diff = (free_param_count(parse_model(code), G, p, dims)
                        - free_param_count(parse_model(sibling), G, p, dims))
                assert diff == G - 1

    def test_strictly_increasing_in_p(self):
        for code in MODEL_CODES:
            spec = parse_model(code)
            counts = [free_param_count(spec, 2, p, (2, 2)) for p in (4, 5, 6, 8, 12)]
            assert all(b > a for a, b in zip(counts, counts[1:])), code

    def test_gaussian_count_drops_nu_block(self):
        kw = dict(G=3, p=5, dims=(2, 2, 2))
        assert (free_param_count(parse_model("UUUUU"), **kw)
                - gaussian_param_count(parse_model("UUUUU"), **kw)) == 3
        assert (free_param_count(parse_model("UUUUC"), **kw)
                - gaussian_param_count(parse_model("UUUUC"), **kw)) == 1


class TestDimensionAssignment:
    def test_of_scalar_list(self):
        da = DimensionAssignment.of([2, 3])
        assert da.dims == (2, 3) and da.s == 5
