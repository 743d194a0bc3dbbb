"""Reproducibility assessment: train/test and split-half z scores.

Statistical significance alone does not guarantee that a latent variable
reproduces. Here the rows are repeatedly partitioned into disjoint halves;
the train/test metric projects held-out data through the training vectors,
and the split-half metric compares the singular vectors fitted on each
half. Each LV's distribution over splits is summarized as z = mean / sd,
and a permuted-Y null calibration shows what z to expect from
dimensionality alone.
"""

from crossblock import (
    SimulationSpec,
    generate_relevant_subspace,
    null_calibration,
    split_half,
    train_test,
)

spec = SimulationSpec(
    n=4000, p=6, q_per_component=(3,), relpos=((1,),), gamma=0.2,
    m=4, ypos=((1, 2),), eta=0.0, r2=(0.5,), seed=8,
)
ds = generate_relevant_subspace(spec)
print("one strong seeded dimension (R2 = 0.5), 6 x / 4 y, n = 4000\n")

tt = train_test(ds.x, ds.y, "pls", n_split=500, seed=3, threads=2)
sh = split_half(ds.x, ds.y, "pls", n_split=500, seed=3, threads=2)
null_tt, null_sh = null_calibration(ds.x, ds.y, "pls", n_split=500, seed=3, threads=2)

print("LV   train/test z   (null)    split-half z_u   (null)")
for lv in range(4):
    print(
        f"{lv + 1:>2}   {tt.z[lv]:>10.2f}   {null_tt.z[lv]:>6.2f}"
        f"    {sh.z_u[lv]:>12.2f}   {null_sh.z_u[lv]:>6.2f}"
    )

print(
    "\nLV1 reproduces massively relative to its null; trailing LVs sit at the"
    "\nnull level (~1.5), which is what uncorrected dimensionality produces."
)
ratio = sh.z_u[0] / null_sh.z_u[0]
print(f"observed / null split-half ratio for LV1: {ratio:.0f}x")
