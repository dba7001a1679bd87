"""Benchmark the compiled kernel backend against the numpy fallback.

Times the four hot kernels on classifier-shaped inputs and a full model
forward+backward step per backend. Run as:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import timeit

import numpy as np

from beamsense.engine import backend, layers


def bench(fn, repeats):
    times = timeit.repeat(fn, number=1, repeat=repeats)
    return min(times)


def kernel_cases(rng):
    x1 = rng.standard_normal((32, 20, 50, 56))
    cols = backend.kernels_np.im2col(x1, 3, 3)
    pooled_in = rng.standard_normal((32, 16, 48, 54))
    out, arg = backend.kernels_np.maxpool2_forward(pooled_in)
    return {
        "im2col 3x3 (32,20,50,56)": lambda k: k.im2col(x1, 3, 3),
        "col2im 3x3": lambda k: k.col2im(cols, 32, 20, 50, 56, 3, 3),
        "maxpool2 fwd (32,16,48,54)": lambda k: k.maxpool2_forward(pooled_in),
        "maxpool2 bwd": lambda k: k.maxpool2_backward(out, arg, 48, 54),
    }


def model_step(rng):
    from beamsense.classifier import build_model
    from beamsense.engine.losses import softmax_cross_entropy
    model = build_model(0)
    x = rng.standard_normal((32, 20, 50, 56))
    y = rng.integers(0, 8, 32)

    def step():
        logits = model.forward(x, mode="train")
        _, grad = softmax_cross_entropy(logits, y)
        model.backward(grad)

    return step


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = backend.available_backends()
    rng = np.random.default_rng(0)
    cases = kernel_cases(rng)

    width = max(len(n) for n in cases) + 2
    header = f"{'kernel':<{width}}" + "".join(
        f"{name:>12}" for name in backends)
    print(header)
    print("-" * len(header))
    results = {}
    for case, fn in cases.items():
        row = f"{case:<{width}}"
        for name, mod in backends.items():
            t = bench(lambda: fn(mod), args.repeats)
            results[(case, name)] = t
            row += f"{t * 1e3:>10.2f}ms"
        print(row)

    print()
    for name, mod in backends.items():
        layers.kernels = mod            # route the whole model through it
        t = bench(model_step(np.random.default_rng(0)), args.repeats)
        print(f"full train step (batch 32), {name:<8} {t * 1e3:8.1f} ms")
    layers.kernels = backend.kernels


if __name__ == "__main__":
    main()
