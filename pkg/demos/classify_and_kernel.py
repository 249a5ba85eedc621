"""
Sign digraphs, the five classes, and the equilibrium segment K
==============================================================

Walk the five canonical payoff matrices through classification and
kernel geometry, then bump one entry to show how the permanence
verdict flips when the Pfaffian leaves zero.
"""

from fractions import Fraction

from replicator4 import (build_digraph, canonical_matrix, classify,
                         format_matrix, is_permanent, kernel_line_section,
                         PayoffMatrix)

# ----------------------------------------------------------------------
# the five canonical representatives

for name in ("I", "II", "III", "IV", "V"):
    M = canonical_matrix(name)
    G = build_digraph(M)
    label = classify(G)
    section = kernel_line_section(M)

    print(f"class {name}:  A = {format_matrix(M)}")
    print(f"  edges {sorted(G.edges)}  "
          f"3-cycles {G.three_cycles}  4-cycles {G.four_cycles}")
    print(f"  pfaffian {M.pfaffian()}  permanent {is_permanent(M)}")
    for point, locus in zip(section.endpoints, section.loci):
        coords = ", ".join(str(v) for v in point)
        print(f"  endpoint ({coords})  on {locus.kind} {locus.strategies}")
    print()

# ----------------------------------------------------------------------
# breaking singularity breaks permanence
#
# Scale one entry of the class V matrix.  The digraph (and hence the
# class label) is untouched because signs are untouched, but pf != 0
# kills the interior equilibria and with them permanence.

M = canonical_matrix("V")
rows = [list(r) for r in M.rows]
rows[1][3] = Fraction(2)
rows[3][1] = Fraction(-2)
bumped = PayoffMatrix.from_rows(rows, exact=True)

print("bumped class V entry a24: 1 -> 2")
print(f"  class {classify(build_digraph(bumped)).name}  "
      f"pfaffian {bumped.pfaffian()}  permanent {is_permanent(bumped)}")
