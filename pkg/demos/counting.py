"""How many admissible symbol sequences fit in [0, T]?

Sequences of even symbols s >= m with sum((s + 1) P) <= T, counted by
dynamic programming and compared with the growth rate (m/2 + 1) per
(m + 1) periods.
"""
from sitnikov.symbolic import count_sequences, enumerate_sequences

for m in (2, 4):
    K = m + 1
    print(f"m = {m}")
    print(f"  {'T/P':>4} {'count':>8} {'(m/2+1)^(T/((m+1)P))':>22} {'ratio to T-(m+1)P':>18}")
    for N in range(K, 8 * K + 1, K):
        c = count_sequences(N, m)
        prev = count_sequences(N - K, m)
        ratio = f"{c / prev:.3f}" if prev else "-"
        print(f"  {N:>4} {c:>8} {(m / 2 + 1) ** (N / K):>22.2f} {ratio:>18}")

print("m = 2, T = 9P:", enumerate_sequences(9, 2).sequences)
