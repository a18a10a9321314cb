import math


def assertClose(a, b, rel=1e-12, abs_=0.0):
    assert math.isclose(a, b, rel_tol=rel, abs_tol=abs_), f"{a!r} != {b!r}"


def assertWithinSigma(estimate, exact, trials, k=3.0):
    """A binomial estimate within `k` standard deviations of `exact`."""
    sigma = math.sqrt(max(exact * (1.0 - exact), 0.0) / trials)
    assert abs(estimate - exact) <= k * sigma, (estimate, exact, sigma)


def assertNonincreasing(values, slack=0.0):
    for left, right in zip(values, values[1:]):
        assert right <= left + slack, (left, right)
