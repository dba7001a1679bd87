"""Central finite-difference verification of backward passes.

A fragment is anything with forward(x) -> y and backward(grad_y) -> grad_x,
plus optional params()/grads() dicts of named arrays (layer parameters are
perturbed in place through the returned views).

The analytic side projects the output onto a fixed random direction so the
check reduces to a scalar function; the numeric side central-differences
that same scalar. Inputs should be random/continuous so relu kinks and pool
ties are avoided.
"""

import numpy as np


def _coords(arrays, rng, max_evals):
    flat = [(name, i) for name, a in arrays.items() for i in range(a.size)]
    if max_evals is not None and len(flat) > max_evals:
        picks = rng.choice(len(flat), size=max_evals, replace=False)
        flat = [flat[i] for i in sorted(picks)]
    return flat

def grad_check(fragment, x, perturbation=1e-5, rng=None, max_evals=None,
               skip_kinks=False):
    """Max relative error between analytic and central-difference gradients.

    Error per coordinate is |analytic - numeric| / max(|analytic|, |numeric|,
    1e-12); the max runs over the input and all parameters. With max_evals
    set, a seeded random subset of coordinates is checked instead of all.

    With skip_kinks, coordinates whose +/- perturbation lands in different
    linear regions (detected by halving the step and comparing the two
    difference quotients) are dropped: there central differences do not
    estimate the one-sided derivative the backward pass is defined to
    return. Large piecewise-linear fragments need this.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.array(x, dtype=np.float64)
    y = fragment.forward(x)
    proj = rng.standard_normal(np.shape(y))

    grad_x = np.asarray(fragment.backward(proj))
    params = fragment.params() if hasattr(fragment, "params") else {}
    grads = fragment.grads() if hasattr(fragment, "grads") else {}

    arrays = {"__input__": x}
    arrays.update(params)
    analytic = {"__input__": grad_x}
    analytic.update(grads)

    def scalar():
        return float(np.sum(fragment.forward(x) * proj))

    def central(a, i, h):
        orig = a.flat[i]
        a.flat[i] = orig + h
        up = scalar()
        a.flat[i] = orig - h
        down = scalar()
        a.flat[i] = orig
        return (up - down) / (2 * h)

    worst = 0.0
    for name, i in _coords(arrays, rng, max_evals):
        a = arrays[name]
        numeric = central(a, i, perturbation)
        ana = analytic[name].flat[i]
        err = abs(ana - numeric) / max(abs(ana), abs(numeric), 1e-12)
        if err > 1e-6 and skip_kinks:
            # smooth region: halving the step changes the quotient only at
            # O(h^2); a kink inside the interval shows up as a large shift
            half = central(a, i, perturbation / 2)
            scale = max(abs(numeric), abs(half), 1e-12)
            if abs(numeric - half) / scale > 1e-3:
                continue
            # both steps sit in one linear region; the spread between them
            # is rounding noise, so keep the closer estimate
            err = min(err, abs(ana - half) / max(abs(ana), abs(half), 1e-12))
        worst = max(worst, err)
    # restore caches consistent with the unperturbed point
    fragment.forward(x)
    fragment.backward(proj)
    return worst
