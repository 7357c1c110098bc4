"""The whole pipeline on the bundled synthetic case, skipping human review.

Generates the fixture (frames + WAV + detections + annotations), runs every
stage through evaluation, and prints the final report. Artifacts land under
demo_out/endtoend/runs/demo/.
"""

from pathlib import Path

from shotloc.config import load_config
from shotloc.pipeline import run_pipeline, read_jsonl
from shotloc.synthcase import build_case

root = Path("demo_out") / "endtoend"
print(f"1. building the synthetic case under {root} ...")
case = build_case(root, seed=0)
print(f"   video {case.video_id}: shooter rectangle, drifting smoke puff at "
      f"frame {case.event_frame}, gunshot bursts in the audio")

print("2. running: audio -> score -> rerank -> threshold -> flow -> smoke "
      "-> localize -> eval (review skipped) ...")
config = load_config(case.config_path)
manifest = run_pipeline(config, run_id="demo", no_review=True)
for stage, state in manifest.stages.items():
    print(f"   {stage:<10} {state.status}")

run_dir = root / "runs" / "demo"
gated = read_jsonl(run_dir / "gated.jsonl")
print(f"3. {len(gated)} segment(s) passed the 70% gate")

muzzles = [r for r in read_jsonl(run_dir / "localize.jsonl")
           if r["muzzle"] is not None]
at_event = [r for r in muzzles if r["frame_index"] == case.event_frame]
if at_event:
    mx, my = at_event[0]["muzzle"]
    gx, gy = case.muzzle_point
    print(f"4. muzzle at the annotated frame: ({mx:.1f}, {my:.1f}); "
          f"ground truth ({gx:.1f}, {gy:.1f})")

print("5. final report:")
print((run_dir / "report.txt").read_text())
print(f"   overlays: {sorted((run_dir / 'overlays').glob('*/*.ppm'))[0]} ...")
