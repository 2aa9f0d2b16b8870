/** Upload lifecycle for the single-recording workflow.
 *
 * Phases move along idle → selected → uploading → (done | error). A file can
 * be re-selected from any settled phase, and a finished or failed upload can
 * be submitted again (retry), but nothing may interrupt an upload in flight:
 * the UI allows one upload at a time. Every transition function returns a
 * fresh state and throws IllegalTransition when called out of phase, so a
 * wiring bug fails loudly instead of rendering nonsense.
 */
export class IllegalTransition extends Error {
    constructor(from, action) {
        super(`cannot ${action} from phase "${from}"`);
        this.name = "IllegalTransition";
    }
}
export const IDLE = {
    phase: "idle",
    fileName: null,
    progress: 0,
    result: null,
    errorMessage: null,
    canRetry: false,
};
function require_(state, allowed, action) {
    if (!allowed.includes(state.phase)) {
        throw new IllegalTransition(state.phase, action);
    }
}
function checked(state) {
    if ((state.result !== null) !== (state.phase === "done")) {
        throw new Error(`state invariant broken: result must be set exactly in "done"`);
    }
    if ((state.errorMessage !== null) !== (state.phase === "error")) {
        throw new Error(`state invariant broken: errorMessage must be set exactly in "error"`);
    }
    return state;
}
/** A file was chosen (or re-chosen). Clears any previous result or error. */
export function selectFile(state, fileName) {
    require_(state, ["idle", "selected", "done", "error"], "select a file");
    return checked({
        ...IDLE,
        phase: "selected",
        fileName,
    });
}
/** Submit pressed. Valid whenever a file is selected, including for retries. */
export function beginUpload(state) {
    require_(state, ["selected", "done", "error"], "begin an upload");
    return checked({
        ...IDLE,
        phase: "uploading",
        fileName: state.fileName,
        progress: 0,
    });
}
/** Bytes left the machine; fraction is clamped into [0, 1]. */
export function setProgress(state, fraction) {
    require_(state, ["uploading"], "report progress");
    return checked({
        ...state,
        progress: Math.min(1, Math.max(0, fraction)),
    });
}
export function complete(state, result) {
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
export function fail(state, message, canRetry = false) {
    require_(state, ["uploading"], "fail an upload");
    return checked({
        ...state,
        phase: "error",
        result: null,
        errorMessage: message,
        canRetry,
    });
}
