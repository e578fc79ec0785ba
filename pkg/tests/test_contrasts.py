import numpy as np
import pytest

from pauc.contrasts import ContrastMatrix, custom, dunnett, from_config, interaction, tukey


class TestFamilies:
    def test_tukey_three_markers(self):
        c = tukey(3)
        np.testing.assert_array_equal(c.rows, [[1, -1, 0], [1, 0, -1], [0, 1, -1]])
        assert c.labels == ("1 - 2", "1 - 3", "2 - 3")

    @pytest.mark.parametrize("kappa", [2, 3, 5, 8])
    def test_tukey_row_count(self, kappa):
        assert tukey(kappa).r == kappa * (kappa - 1) // 2

    def test_dunnett_reference(self):
        c = dunnett(3, reference=1, names=["A", "B", "C"])
        np.testing.assert_array_equal(c.rows, [[1, -1, 0], [0, -1, 1]])
        assert c.labels == ("A - B", "C - B")

    def test_dunnett_default_reference(self):
        np.testing.assert_array_equal(dunnett(3).rows, [[-1, 1, 0], [-1, 0, 1]])

    def test_interaction_two_by_two(self):
        c = interaction(2, 2)
        assert c.rows.shape == (4, 4)
        expected = np.array([1, -1, -1, 1]) / 4
        for row in c.rows:
            assert np.allclose(row, expected) or np.allclose(row, -expected)

    def test_interaction_three_by_two(self):
        c = interaction(3, 2)
        assert c.rows.shape == (6, 6)
        assert np.linalg.matrix_rank(c.rows) == 2
        np.testing.assert_allclose(c.rows.sum(axis=1), 0, atol=1e-15)

    def test_interaction_annihilates_additive_effects(self):
        a, b = np.array([0.1, 0.4, -0.2]), np.array([0.3, -0.1])
        theta = (a[:, None] + b[None, :]).ravel()
        np.testing.assert_allclose(interaction(3, 2).rows @ theta, 0, atol=1e-15)

    @pytest.mark.parametrize("builder", [lambda: tukey(1), lambda: dunnett(1), lambda: interaction(1, 3)])
    def test_too_few_levels(self, builder):
        with pytest.raises(ValueError):
            builder()

    def test_dunnett_reference_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            dunnett(3, reference=3)


class TestValidation:
    def test_zero_row_named(self):
        with pytest.raises(ValueError, match="row 2 is identically zero"):
            custom([[1, -1, 0], [0, 0, 0]])

    def test_nonzero_sum_named(self):
        with pytest.raises(ValueError, match="row 1 does not sum to zero"):
            custom([[1, 1, 0]])

    def test_label_count(self):
        with pytest.raises(ValueError, match="labels"):
            ContrastMatrix(np.array([[1.0, -1.0]]), ("a", "b"))

    def test_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            custom([[np.inf, -np.inf]])

    def test_rows_are_read_only(self):
        c = tukey(3)
        with pytest.raises(ValueError):
            c.rows[0, 0] = 5.0

    def test_single_row_promoted(self):
        c = custom([1, -1])
        assert c.rows.shape == (1, 2) and c.labels == ("c1",)


class TestFromConfig:
    @pytest.mark.parametrize(
        "cfg, kappa, rows",
        [
            ({"type": "tukey"}, 3, 3),
            ({"type": "dunnett", "reference": 2}, 4, 3),
            ({"type": "interaction", "levels": [3, 2]}, 6, 6),
            ({"type": "custom", "rows": [[1, -1, 0]], "labels": ["x"]}, 3, 1),
        ],
    )
    def test_types(self, cfg, kappa, rows):
        assert from_config(cfg, kappa).r == rows

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown contrast type"):
            from_config({"type": "williams"}, 3)

    def test_column_mismatch(self):
        with pytest.raises(ValueError, match="columns"):
            from_config({"type": "interaction", "levels": [2, 2]}, 3)

    def test_custom_needs_rows(self):
        with pytest.raises(ValueError, match="rows"):
            from_config({"type": "custom"}, 3)
