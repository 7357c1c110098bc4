/** Entry point: wire the triage queue to the service and switch views. */

import { ReviewApi } from "./api.js";
import { TriageQueue } from "./queueStore.js";
import { AnnotateView } from "./views/annotate.js";
import { TriageView } from "./views/triage.js";
import type { SegmentSummary } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new ReviewApi(params.get("service") ?? "");

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const reviewerInput = document.getElementById("reviewer") as HTMLInputElement;
const reviewerName = () => reviewerInput?.value || "anonymous";

const queue = new TriageQueue(api);

function showTriage(): void {
  if (!root) return;
  new TriageView(root, api, queue, reviewerName, (segment) => {
    void showAnnotate(segment);
  });
  void queue.load();
}

async function showAnnotate(segment: SegmentSummary): Promise<void> {
  if (!root) return;
  const schema = await api.annotationSchema();
  new AnnotateView(root, api, schema, segment, () => showTriage());
}

showTriage();
