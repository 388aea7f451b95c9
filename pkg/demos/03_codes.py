"""Row-independence constructions over finite fields.

Two families of matrices whose small row subsets are always linearly
independent: Vandermonde matrices over a prime field, and transposed
parity-check matrices of binary BCH codes.  Both claims are verified by
exhaustive rank checks, and the BCH route shows the code-distance view
of the same property.
"""

from attnio import fields as F

# Vandermonde: row i = (1, i, i^2, ...); any d rows independent
v = F.vandermonde_matrix(8, 3, 17)
print("Vandermonde over F_17, N=8, d=3:")
for row in v.data:
    print("  ", [int(x) for x in row])
ok, _ = F.all_k_subsets_independent(v, 3)
print(f"all C(8,3) = 56 row triples independent: {ok}")

# the determinant of any d-row submatrix factors as prod (x_j - x_i)
sub = v.row_submatrix([1, 4, 6])
points = [2, 5, 7]
print(f"det(rows 1,4,6) = {sub.det()} "
      f"= product formula {F.vandermonde_det_formula(points, 17)}\n")

# BCH: distance-5 code of length 15 -> any 4 columns of H independent
h = F.bch_parity_check(4, 5)
print(f"BCH parity check, m=4 (length 15), designed distance 5: "
      f"{h.rows} rows x {h.cols} cols, rank {h.rank()}")
print(f"minimum distance by null-space enumeration: {F.min_code_distance(h)}")
ok, _ = F.all_k_subsets_independent(h.transpose(), 4)
print(f"all C(15,4) = 1365 column quadruples independent: {ok}")

# the Hamming code is the s=3 special case
ham = F.bch_parity_check(3, 3)
print(f"\nm=3, s=3 gives the Hamming(7,4) check: {ham.rows} rows, "
      f"distance {F.min_code_distance(ham)}")

# packaged as a binary N x d matrix with guaranteed row independence
k = F.binary_independence_matrix(15, 8)
t = F.independence_parameter(15, 8)
ok, _ = F.all_k_subsets_independent(k, t)
print(f"\nbinary 15 x 8 matrix: any floor(2d/log2(N+1)) - 1 = {t} rows "
      f"independent: {ok}")
