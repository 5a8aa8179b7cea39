"""
Locating Fano features
======================

Detuned mirrors move the interference feature away from line center.
"""

from fano_forge import extract_features, get_preset, run_sweep

# strong extrema only; the Lorentzian background also has a broad peak at 0
for name in ("fig5a", "fig5b", "fig6_blue", "fig7", "fig7_red", "fig8_blue", "fig8_black"):
    pr = get_preset(name)
    feats = [f for f in extract_features(run_sweep(pr)) if abs(f.location) > 0.05 or f.kind == "dip"]
    listed = ", ".join(f"{f.kind} {f.location:+.4f} ({f.value:.3f})" for f in feats) or "none"
    print(f"{name:11s} {listed}")

# the refinement windows around expected features are part of each preset
print(get_preset("fig7").grid.refine)
