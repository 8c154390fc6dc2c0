"""Cross-view verification: ROC, AUC, EER and TMR at fixed FMR.

Same synthetic setup as demo 01, but instead of ranking a gallery we
score genuine/impostor image pairs across the two spaces and sweep a
decision threshold.

Run:  python3 demos/02_verification_metrics.py
"""

from embalign import embed_view, evaluate_verification, generate_identity_cloud


def main():
    cloud = generate_identity_cloud(
        100, 10, intrinsic_dim=16, seed=7
    )
    view_a = embed_view(cloud, 64, view_seed=10, model_name="model_a")
    view_b = embed_view(cloud, 64, view_seed=20, model_name="model_b", noise=0.05)

    report = evaluate_verification(view_a, view_b, method="procrustes")
    s = report.summary
    b = report.baseline_summary

    def line(name, d):
        return f"  {name:<12s} mean {d['mean']:.4f}  std {d['std']:.4f}"

    print("Aligned (Procrustes):")
    print(line("AUC", s["auc"]))
    print(line("EER", s["eer"]))
    for target in ("0.01", "0.001"):
        print(line(f"TMR@{target}", s["tmr_at_fmr"][target]))
    print()
    print("Unaligned baseline:")
    print(line("AUC", b["auc"]))
    print(line("EER", b["eer"]))
    print()
    print("First points of the vertically averaged ROC (fmr, tmr):")
    grid = s["roc_grid"]
    for f, t in list(zip(grid["fmr"], grid["tmr_mean"]))[:8]:
        print(f"  {f:.6f}  {t:.4f}")


if __name__ == "__main__":
    main()
