"""
Vibronic ground-state degeneracy
================================

Exact diagonalization of the coupled electron-oscillator Hamiltonian in a
total-quanta basis. At strong coupling the ground level of e_x_e is a doublet
and that of t_e_t2 a triplet, the degeneracies of the odd rotor levels.
"""

from jtgeom import build_model
from jtgeom.vibronic import low_spectrum, rotor_spectrum

s = low_spectrum(build_model("e_x_e", F=5.0), n_max=40, k=8)
print("e_x_e F=5 clusters:", s.degeneracies, " converged:", s.converged, f" shift vs n_max=38: {s.ground_shift:.1e}")
print("  energies:", [round(e, 6) for e in s.cluster_energies()])

t = low_spectrum(build_model("t_e_t2", F=4.0), n_max=10, k=14, check=False)
print("t_e_t2 F=4 clusters:", t.degeneracies)

# rotor reference: odd sector on the sphere, antiperiodic sector on the circle
for N, parity in ((3, "odd"), (2, "antiperiodic"), (3, "even")):
    r = rotor_spectrum(N, parity, count=3)
    print(f"rotor N={N} {parity}:", [(lv.L, lv.energy, lv.degeneracy) for lv in r.levels])
