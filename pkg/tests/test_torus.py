import numpy as np
import numpy.testing as npt
import pytest

import polar_derham as pd


class TestSpec:
    def test_distinct_knot_round_trip(self):
        spec = pd.TorusComplexSpec(degrees=(3, 2, 3), dims=(5, 6, 4))
        again = pd.TorusComplexSpec.from_distinct_knots((3, 2, 3),
                                                        spec.distinct_knots)
        assert again.dims == (5, 6, 4)

    @pytest.mark.parametrize("kwargs", [
        dict(degrees=(1, 2, 2), dims=(4, 4, 3)),
        dict(degrees=(2, 2, 2), dims=(2, 4, 3)),
        dict(degrees=(2, 2, 2), dims=(4, 3, 3)),
        dict(degrees=(2, 2, 2), dims=(4, 4, 2)),
        dict(degrees=(2, 2, 2), dims=(4, 4, 3), rho_bar=2.0),
        dict(degrees=(2, 2, 2), dims=(4, 4, 3), lengths=(0.0, 1.0, 1.0)),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            pd.TorusComplexSpec(**kwargs)

    def test_lengths_respected(self, complex_cache):
        cx = complex_cache(dims=(4, 4, 3), lengths=(2.0, 3.0, 4.0))
        assert cx.tensor.spaces[0].interval == (0.0, 2.0)
        assert cx.tensor.spaces[1].interval == (0.0, 3.0)
        assert cx.tensor.spaces[2].interval == (0.0, 4.0)


class TestFieldCoefficients:
    def test_validation(self):
        with pytest.raises(ValueError, match="level"):
            pd.FieldCoefficients(level=4, space="reduced", data=np.zeros(3))
        with pytest.raises(ValueError, match="space"):
            pd.FieldCoefficients(level=0, space="weird", data=np.zeros(3))

    def test_complex_checks_length(self, cx443):
        bad = pd.FieldCoefficients(level=0, space="reduced", data=np.zeros(5))
        with pytest.raises(ValueError, match="coefficients"):
            cx443.grad(bad)

    def test_level_mismatch(self, cx443):
        field = pd.FieldCoefficients(level=1, space="reduced",
                                     data=np.zeros(cx443.counts.n1))
        with pytest.raises(ValueError, match="level"):
            cx443.grad(field)


class TestOperators:
    def test_reduced_chain(self, cx443):
        rng = np.random.default_rng(51)
        f = rng.standard_normal(cx443.counts.n0)
        g = cx443.grad(f)
        h = cx443.curl(g)
        m = cx443.div(h)
        assert g.data.shape == (cx443.counts.n1,)
        assert h.data.shape == (cx443.counts.n2,)
        assert np.abs(h.data).max() <= 1e-12          # curl of gradient
        assert np.abs(m.data).max() <= 1e-12

    def test_tensor_chain(self, cx443):
        rng = np.random.default_rng(52)
        f = pd.FieldCoefficients(0, "tensor",
                                 rng.standard_normal(cx443.tensor.level_dim(0)))
        g = cx443.grad(f)
        assert g.space == "tensor"
        assert np.abs(cx443.curl(g).data).max() <= 1e-13

    def test_reduction_commutes_with_differentials(self, cx443):
        # re-expressing on the tensor levels then differentiating equals
        # differentiating on the reduced DOFs then re-expressing
        rng = np.random.default_rng(53)
        f = rng.standard_normal(cx443.counts.n0)
        left = cx443.tensor.apply_grad(cx443.to_tensor(
            pd.FieldCoefficients(0, "reduced", f)).data)
        right = cx443.to_tensor(cx443.grad(f)).data
        npt.assert_allclose(left, right, atol=1e-13)

        g = rng.standard_normal(cx443.counts.n1)
        left = cx443.tensor.apply_curl(cx443.to_tensor(
            pd.FieldCoefficients(1, "reduced", g)).data)
        right = cx443.to_tensor(cx443.curl(g)).data
        npt.assert_allclose(left, right, atol=1e-13)

        h = rng.standard_normal(cx443.counts.n2)
        left = cx443.tensor.apply_div(cx443.to_tensor(
            pd.FieldCoefficients(2, "reduced", h)).data)
        right = cx443.to_tensor(cx443.div(h)).data
        npt.assert_allclose(left, right, atol=1e-13)


def test_dims_record(cx443):
    record = cx443.dims_record()
    assert record["reduced_dims"] == [33, 87, 78, 24]
    assert record["tensor_dims"] == [48, 132, 120, 36]
    assert record["nbar"] == [11, 18, 8]
    assert record["alternating_sum"] == 0
    assert record["distinct_knots"] == [5, 3, 4]


def test_named_matrices(cx443):
    mats = cx443.named_matrices()
    assert len(mats) == 18
    assert mats["D0"].shape == (87, 33)
    assert mats["E000"].shape == (33, 48)
    assert mats["H0_r"].shape == (4, 6)
    assert mats["D100"].shape == (48, 48)
