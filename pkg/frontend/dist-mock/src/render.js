/** DOM construction for the result, progress, and error views.
 *
 * Pure functions from data to elements: no network, no global state, so the
 * views are testable with a bare document.
 */
import { ApiError, MalformedPayload } from "./api.js";
import { displayPercentages, formatPercent } from "./percent.js";
import { TransportError } from "./transport.js";
/** createElement with class, attributes, and children in one call. */
export function el(tag, options = {}, children = []) {
    const node = document.createElement(tag);
    if (options.className) {
        node.className = options.className;
    }
    for (const [name, value] of Object.entries(options.attrs ?? {})) {
        node.setAttribute(name, value);
    }
    if (options.text !== undefined) {
        node.textContent = options.text;
    }
    for (const child of children) {
        node.append(child);
    }
    return node;
}
const SOURCE_BADGES = {
    bundled: "offline reference data",
    external_api: "live medical reference",
};
export function sourceBadgeText(source) {
    return SOURCE_BADGES[source] ?? source;
}
/** Class names with their probabilities, highest first; ties break by name. */
export function rankedClasses(probabilities) {
    return Object.entries(probabilities)
        .map(([name, prob]) => ({ name, prob }))
        .sort((a, b) => b.prob - a.prob || a.name.localeCompare(b.name));
}
function probabilityBars(probabilities) {
    const ranked = rankedClasses(probabilities);
    const percents = displayPercentages(ranked.map((r) => r.prob));
    const list = el("ul", { className: "prob-bars" });
    ranked.forEach((entry, i) => {
        const fill = el("span", { className: "prob-fill" });
        fill.style.width = `${(entry.prob * 100).toFixed(3)}%`;
        list.append(el("li", { className: "prob-row", attrs: { "data-class": entry.name } }, [
            el("span", { className: "prob-name", text: entry.name }),
            el("span", { className: "prob-track" }, [fill]),
            el("span", { className: "prob-value", text: formatPercent(percents[i]) }),
        ]));
    });
    return list;
}
/** Replace `panel`'s contents with the full prediction view. */
export function renderResult(panel, result) {
    const info = result.disease_info;
    const article = el("article", { className: "result" }, [
        el("header", { className: "result-header" }, [
            el("h2", { className: "predicted-label", text: result.label }),
            el("span", {
                className: "source-badge",
                attrs: { "data-source": info.source },
                text: sourceBadgeText(info.source),
            }),
        ]),
        el("p", { className: "scheme-line", text: `Label scheme: ${result.scheme}` }),
        probabilityBars(result.probabilities),
        el("section", { className: "disease-summary" }, [
            el("h3", { text: `About ${info.name}` }),
            el("p", { text: info.summary }),
        ]),
    ]);
    if (info.symptoms.length > 0) {
        article.append(el("section", { className: "symptoms" }, [
            el("h3", { text: "Common symptoms" }),
            el("ul", {}, info.symptoms.map((s) => el("li", { text: s }))),
        ]));
    }
    panel.replaceChildren(article);
}
/** Replace `panel`'s contents with an error box; `onRetry` adds a retry button. */
export function renderError(panel, message, onRetry) {
    const box = el("div", { className: "error-box", attrs: { role: "alert" } }, [
        el("p", { className: "error-message", text: message }),
    ]);
    if (onRetry) {
        const button = el("button", {
            className: "retry-button",
            attrs: { type: "button" },
            text: "Retry upload",
        });
        button.addEventListener("click", onRetry);
        box.append(button);
    }
    panel.replaceChildren(box);
}
/** Update a progress bar pair (fill element + text element) to `fraction`. */
export function renderProgress(fill, text, fraction) {
    const pct = Math.round(Math.min(1, Math.max(0, fraction)) * 100);
    fill.style.width = `${pct}%`;
    fill.setAttribute("aria-valuenow", String(pct));
    text.textContent = `Uploading… ${pct}%`;
}
/** Map a thrown failure to the sentence shown in the error box. */
export function describeFailure(err) {
    if (err instanceof TransportError) {
        return {
            message: "Network error: could not reach the analysis service. Check the connection and retry.",
            canRetry: true,
        };
    }
    if (err instanceof ApiError) {
        if (err.status === 413) {
            return {
                message: `This recording is too large to upload (${err.code}: ${err.detail}).`,
                canRetry: false,
            };
        }
        if (err.status >= 400 && err.status < 500) {
            return {
                message: `Unsupported audio file: the server could not decode it ` +
                    `(${err.code}: ${err.detail}). Upload an uncompressed PCM WAV recording.`,
                canRetry: false,
            };
        }
        return {
            message: `The analysis service is unavailable (${err.code}: ${err.detail}). Try again shortly.`,
            canRetry: true,
        };
    }
    if (err instanceof MalformedPayload) {
        return {
            message: `The server returned an unreadable response (${err.message}).`,
            canRetry: true,
        };
    }
    return {
        message: `Unexpected failure: ${err instanceof Error ? err.message : String(err)}`,
        canRetry: false,
    };
}
