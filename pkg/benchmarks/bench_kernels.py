"""Compare the compiled and pure-Python kernels: python benchmarks/bench_kernels.py [n] [repeat]."""
import sys

from ldirk3.bench import run_benchmark

if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    repeat = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    for line in run_benchmark(n, repeat):
        print(line)
