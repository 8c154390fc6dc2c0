"""Recover a planted rotation between two synthetic embedding views.

Two views of the same identity cloud are produced with independent
orthogonal maps.  Without alignment the views are incomparable (cosine
search is at chance); a Procrustes map fitted on a disjoint set of
identities restores near-perfect cross-view identification.

Run:  python3 demos/01_synthetic_alignment.py
"""

from embalign import (
    embed_view,
    evaluate_identification,
    generate_identity_cloud,
)


def main():
    cloud = generate_identity_cloud(
        100, 10, intrinsic_dim=16, seed=7
    )
    view_a = embed_view(cloud, 64, view_seed=10, model_name="model_a")
    view_b = embed_view(cloud, 64, view_seed=20, model_name="model_b")

    print("Two 64-d views of the same 1000 images, independently rotated.")
    print()

    for method in ("procrustes", "linear", "ridge"):
        report = evaluate_identification(view_a, view_b, method=method)
        r1 = report.summary["rank_k"]["1"]
        base = report.baseline_summary["rank_k"]["1"]
        print(
            f"{method:>10s}:  Rank-1 = {100 * r1['mean']:6.2f} ± {100 * r1['std']:.2f} %"
            f"   (unaligned baseline {100 * base['mean']:.2f} %)"
        )

    print()
    print("The baseline is near chance; any of the three linear maps")
    print("recovers the correspondence almost exactly.")


if __name__ == "__main__":
    main()
