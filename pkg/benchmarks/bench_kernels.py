"""Time the compiled and pure-Python kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Inputs come from the H4 fixture: the one- plus two-body Hamiltonian for the
Wick and Jordan-Wigner kernels, its Pauli image for the Pauli product, and
the Hartree-Fock vector for the state application.
"""

import argparse
import timeit

import numpy as np

from hfmoments import kernels
from hfmoments.fermion import build_hamiltonian
from hfmoments.fixtures import load_fixture
from hfmoments.pauli import jordan_wigner


def workloads():
    mi = load_fixture("h4")[0]
    h = build_hamiltonian(mi)
    H = jordan_wigner(h)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=1 << H.n_qubits) + 1j * rng.normal(size=1 << H.n_qubits)
    return {
        "wick_product": (h.keys, h.coeffs, h.keys, h.coeffs, mi.n_elec),
        "jordan_wigner_terms": (h.keys, h.coeffs),
        "pauli_product": (H.keys, H.coeffs, H.keys, H.coeffs),
        "pauli_apply": (H.keys, H.coeffs, psi),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not importable; timing the pure-Python kernels only")
    print(f"{'kernel':<22}" + "".join(f"{b:>14}" for b in backends) + ("       speedup" if len(backends) == 2 else ""))
    for name, call_args in workloads().items():
        times = []
        for b in backends:
            fn = getattr(kernels.get_backend(b), name)
            number = 1
            while timeit.timeit(lambda: fn(*call_args), number=number) < 0.2:
                number *= 2
            best = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat)) / number
            times.append(best)
        row = f"{name:<22}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>13.1f}x"
        print(row)


if __name__ == "__main__":
    main()
