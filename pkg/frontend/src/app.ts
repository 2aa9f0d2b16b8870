/** Page assembly and event wiring for the single-recording workflow.
 *
 * The page never talks to the network until the user presses Analyze, keeps
 * at most one upload in flight (the button and file input are disabled while
 * uploading), and never stores the recording anywhere client-side.
 */

import { ApiClient, type PredictionResult } from "./api.js";
import { describeFailure, el, renderError, renderProgress, renderResult } from "./render.js";
import {
  beginUpload,
  complete,
  fail,
  IDLE,
  selectFile,
  setProgress,
  type UploadState,
} from "./state.js";

export const DISCLAIMER =
  "Research prototype — not a medical diagnosis. Discuss any symptoms with a clinician.";

export interface App {
  readonly root: HTMLElement;
  state(): UploadState;
  /** Resolves when the current upload settles; null when nothing is in flight. */
  inflight: Promise<void> | null;
}

export function initApp(root: HTMLElement, client: ApiClient): App {
  let state: UploadState = IDLE;
  let file: File | null = null;

  const fileInput = el("input", {
    className: "file-input",
    attrs: { type: "file", accept: ".wav,audio/wav,audio/x-wav", "aria-label": "Recording file" },
  });
  const fileName = el("span", { className: "file-name", text: "No recording selected" });
  const submitButton = el("button", {
    className: "submit-button",
    attrs: { type: "button", disabled: "" },
    text: "Analyze recording",
  });
  const progressFill = el("span", {
    className: "progress-fill",
    attrs: { role: "progressbar", "aria-valuemin": "0", "aria-valuemax": "100" },
  });
  const progressText = el("span", { className: "progress-text" });
  const progressWrap = el("div", { className: "progress", attrs: { hidden: "" } }, [
    el("span", { className: "progress-track" }, [progressFill]),
    progressText,
  ]);
  const resultPanel = el("section", { className: "result-panel" });
  const modelVersion = el("span", { className: "model-version" });
  const modelLine = el("p", { className: "model-line", attrs: { hidden: "" } }, [
    "Model ",
    modelVersion,
  ]);

  root.replaceChildren(
    el("header", { className: "app-header" }, [
      el("h1", { text: "VoxMed" }),
      el("p", {
        className: "tagline",
        text: "Upload a digital stethoscope recording to screen for respiratory ailments.",
      }),
    ]),
    el("main", {}, [
      el("section", { className: "upload-panel" }, [
        el("label", { className: "file-label" }, [fileInput]),
        fileName,
        submitButton,
        progressWrap,
      ]),
      resultPanel,
    ]),
    el("footer", { className: "app-footer" }, [
      el("p", { className: "disclaimer", text: DISCLAIMER }),
      modelLine,
    ]),
  );

  const app: App = {
    root,
    state: () => state,
    inflight: null,
  };

  function syncControls(): void {
    const uploading = state.phase === "uploading";
    submitButton.disabled = uploading || file === null;
    fileInput.disabled = uploading;
    progressWrap.hidden = !uploading;
  }

  function showResult(result: PredictionResult): void {
    renderResult(resultPanel, result);
    modelVersion.textContent = result.model_version;
    modelLine.hidden = false;
  }

  function submit(): void {
    if (file === null || state.phase === "uploading") {
      return;
    }
    const current = file;
    state = beginUpload(state);
    resultPanel.replaceChildren();
    renderProgress(progressFill, progressText, 0);
    syncControls();
    app.inflight = client
      .predict(current, (fraction) => {
        state = setProgress(state, fraction);
        renderProgress(progressFill, progressText, state.progress);
      })
      .then((result) => {
        state = complete(state, result);
        showResult(result);
      })
      .catch((err: unknown) => {
        const { message, canRetry } = describeFailure(err);
        state = fail(state, message, canRetry);
        renderError(resultPanel, message, canRetry ? submit : null);
      })
      .finally(() => {
        app.inflight = null;
        syncControls();
      });
  }

  fileInput.addEventListener("change", () => {
    const chosen = fileInput.files?.[0] ?? null;
    if (chosen === null || state.phase === "uploading") {
      return;
    }
    file = chosen;
    state = selectFile(state, chosen.name);
    fileName.textContent = chosen.name;
    resultPanel.replaceChildren();
    modelLine.hidden = true;
    syncControls();
  });

  submitButton.addEventListener("click", submit);

  syncControls();
  return app;
}
