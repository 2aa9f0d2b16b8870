/** Upload lifecycle for the single-recording workflow.
 *
 * Phases move along idle → selected → uploading → (done | error). A file can
 * be re-selected from any settled phase, and a finished or failed upload can
 * be submitted again (retry), but nothing may interrupt an upload in flight:
 * the UI allows one upload at a time. Every transition function returns a
 * fresh state and throws IllegalTransition when called out of phase, so a
 * wiring bug fails loudly instead of rendering nonsense.
 */

import type { PredictionResult } from "./api.js";

export type Phase = "idle" | "selected" | "uploading" | "done" | "error";

export interface UploadState {
  readonly phase: Phase;
  readonly fileName: string | null;
  /** Upload fraction in [0, 1]; meaningful while uploading. */
  readonly progress: number;
  /** Non-null exactly when phase === "done". */
  readonly result: PredictionResult | null;
  /** Non-null exactly when phase === "error". */
  readonly errorMessage: string | null;
  /** In the error phase: whether resubmitting the same file could help. */
  readonly canRetry: boolean;
}

export class IllegalTransition extends Error {
  constructor(from: Phase, action: string) {
    super(`cannot ${action} from phase "${from}"`);
    this.name = "IllegalTransition";
  }
}

export const IDLE: UploadState = {
  phase: "idle",
  fileName: null,
  progress: 0,
  result: null,
  errorMessage: null,
  canRetry: false,
};

function require_(state: UploadState, allowed: Phase[], action: string): void {
  if (!allowed.includes(state.phase)) {
    throw new IllegalTransition(state.phase, action);
  }
}

function checked(state: UploadState): UploadState {
  if ((state.result !== null) !== (state.phase === "done")) {
    throw new Error(`state invariant broken: result must be set exactly in "done"`);
  }
  if ((state.errorMessage !== null) !== (state.phase === "error")) {
    throw new Error(`state invariant broken: errorMessage must be set exactly in "error"`);
  }
  return state;
}

/** A file was chosen (or re-chosen). Clears any previous result or error. */
export function selectFile(state: UploadState, fileName: string): UploadState {
  require_(state, ["idle", "selected", "done", "error"], "select a file");
  return checked({
    ...IDLE,
    phase: "selected",
    fileName,
  });
}

/** Submit pressed. Valid whenever a file is selected, including for retries. */
export function beginUpload(state: UploadState): UploadState {
  require_(state, ["selected", "done", "error"], "begin an upload");
  return checked({
    ...IDLE,
    phase: "uploading",
    fileName: state.fileName,
    progress: 0,
  });
}

/** Bytes left the machine; fraction is clamped into [0, 1]. */
export function setProgress(state: UploadState, fraction: number): UploadState {
  require_(state, ["uploading"], "report progress");
  return checked({
    ...state,
    progress: Math.min(1, Math.max(0, fraction)),
  });
}

export function complete(state: UploadState, result: PredictionResult): UploadState {
  require_(state, ["uploading"], "complete an upload");
  return checked({
    ...state,
    phase: "done",
    progress: 1,
    result,
    errorMessage: null,
    canRetry: false,
  });
}

export function fail(state: UploadState, message: string, canRetry = false): UploadState {
  require_(state, ["uploading"], "fail an upload");
  return checked({
    ...state,
    phase: "error",
    result: null,
    errorMessage: message,
    canRetry,
  });
}
