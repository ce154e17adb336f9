# The integer machinery under the decoder: Gaussian-integer arithmetic for
# the coefficient vectors and real lattices for the nested codebooks.

import numpy as np

from latticealign import (
    CoeffVector,
    GaussianInt,
    Lattice,
    NestedPair,
    common_divisor,
    exact_div,
    ggcd,
    is_divisor_free,
    mod_lattice,
    nested_rate,
    quantize,
)
from latticealign.lattice import distributive_mod_identity_check

# --- Gaussian integers -----------------------------------------------------
a = GaussianInt(4, 7)
b = GaussianInt(2, 1)
print(f"{a} * {b} = {a * b}")
print(f"gcd({a * b}, {b * GaussianInt(3, -2)}) = {ggcd(a * b, b * GaussianInt(3, -2))}")

# Coefficient vectors that share a divisor waste rate: dividing it out keeps
# the decoded combination decodable and loosens the quantization error.
vec = CoeffVector(
    entries=(GaussianInt(2, 2), GaussianInt(0, 0), GaussianInt(4, 0)), own_index=1
)
d = common_divisor(vec)
print(f"\nentries {[str(e) for e in vec.entries]} share divisor {d}; "
      f"divisor-free? {is_divisor_free(vec)}")
reduced = CoeffVector(
    entries=tuple(e if e.is_zero() else exact_div(e, d) for e in vec.entries),
    own_index=1,
)
print(f"after dividing: {[str(e) for e in reduced.entries]}; "
      f"divisor-free? {is_divisor_free(reduced)}")

# --- real lattices ----------------------------------------------------------
lat = Lattice(np.array([[1.1, 0.4], [-0.3, 0.9]]))
x = np.array([2.35, -1.2])
q = quantize(lat, x)
r = mod_lattice(lat, x)
print(f"\nnearest lattice point to {x}: {np.round(q, 4)}")
print(f"residual mod lattice: {np.round(r, 4)} (always inside the Voronoi cell)")
assert np.allclose(q + r, x)

# The decoder relies on mod distributing over integer combinations.
ok = distributive_mod_identity_check(lat, np.array([1.7, 2.1]), np.array([-0.4, 0.9]), 3)
print(f"mod-identity check with scalar 3: {ok}")

# Nested pairs: the codebook rate is the log volume ratio per dimension, and
# it telescopes across a chain of nestings.
fine = Lattice(np.eye(2))
mid = Lattice(2.0 * np.eye(2))
coarse = Lattice(6.0 * np.eye(2))
r_direct = nested_rate(NestedPair(coarse=coarse, fine=fine))
r_chain = (nested_rate(NestedPair(coarse=coarse, fine=mid))
           + nested_rate(NestedPair(coarse=mid, fine=fine)))
print(f"\nnested rate fine->coarse: {r_direct:.6f} bits/dim")
print(f"sum along the chain     : {r_chain:.6f} bits/dim (identical)")
