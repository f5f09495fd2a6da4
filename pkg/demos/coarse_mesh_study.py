"""
Error study on a coarse distorted mesh
======================================

Generate a perturbed grid, check it for inverted elements and tabulate the
average percent error of every rule against exact integration.
"""

from hexmass import GridSpec, PerturbedSpec, generate, mesh_validity, report_markdown, study

mesh = generate(PerturbedSpec(GridSpec((5, 5, 5)), amplitude=0.3, seed=42))
print(mesh.label, "-", mesh.n_elements, "elements")

check = mesh_validity(mesh)
print("smallest sampled metric:", check.min_J.min())
print("negative-metric elements:", check.negative_elements)

rep = study(mesh, rules=["g1", "g4", "g6", "tensor2", "cmd", "lmd"])
print(report_markdown(rep))

# A heavier perturbation produces inverted elements.  They stay in the
# study (with a warning) unless the drop policy is asked for.
rough = generate(PerturbedSpec(GridSpec((5, 5, 5)), amplitude=0.45, seed=42))
print("inverted at amplitude 0.45:", len(mesh_validity(rough).negative_elements))
print(report_markdown(study(rough, policy="drop")))
