import pytest

import polar_derham as pd


@pytest.fixture(scope="session")
def complex_cache():
    """Memoize built complexes across the whole test session."""
    cache = {}

    def get(degrees=(2, 2, 2), dims=(4, 4, 3), **kwargs):
        key = (tuple(degrees), tuple(dims), tuple(sorted(kwargs.items())))
        if key not in cache:
            spec = pd.TorusComplexSpec(degrees=degrees, dims=dims, **kwargs)
            cache[key] = pd.build_complex(spec)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def cx443(complex_cache):
    return complex_cache()
