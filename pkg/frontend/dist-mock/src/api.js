/** Typed client for the VoxMed analysis service.
 *
 * Endpoints consumed (all JSON):
 *   POST /api/v1/predict          multipart field "audio", returns a prediction
 *   GET  /api/v1/diseases/{label} background information for one class label
 *   GET  /api/v1/health           service status
 *
 * Error bodies look like {"error": "<Code>", "detail": "<message>"}; the code
 * is surfaced verbatim through ApiError so the UI can show it.
 */
/** The server answered with a non-2xx status and a structured error body. */
export class ApiError extends Error {
    status;
    code;
    detail;
    constructor(status, code, detail) {
        super(`${code} (HTTP ${status}): ${detail}`);
        this.name = "ApiError";
        this.status = status;
        this.code = code;
        this.detail = detail;
    }
}
/** The server answered 2xx but the body does not match the documented contract. */
export class MalformedPayload extends Error {
    constructor(message) {
        super(message);
        this.name = "MalformedPayload";
    }
}
function asRecord(raw, what) {
    if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
        throw new MalformedPayload(`${what} is not a JSON object`);
    }
    return raw;
}
function asString(value, what) {
    if (typeof value !== "string") {
        throw new MalformedPayload(`${what} is missing or not a string`);
    }
    return value;
}
function asFiniteNumber(value, what) {
    if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new MalformedPayload(`${what} is missing or not a finite number`);
    }
    return value;
}
export function parseDiseaseInfo(raw) {
    const doc = asRecord(raw, "disease_info");
    const symptomsRaw = doc.symptoms;
    if (!Array.isArray(symptomsRaw)) {
        throw new MalformedPayload("disease_info.symptoms is not an array");
    }
    const info = {
        name: asString(doc.name, "disease_info.name"),
        summary: asString(doc.summary, "disease_info.summary"),
        symptoms: symptomsRaw.map((s, i) => asString(s, `disease_info.symptoms[${i}]`)),
        source: asString(doc.source, "disease_info.source"),
    };
    if (typeof doc.retrieved_at === "string") {
        info.retrieved_at = doc.retrieved_at;
    }
    return info;
}
export function parsePrediction(raw) {
    const doc = asRecord(raw, "prediction");
    const probsDoc = asRecord(doc.probabilities, "probabilities");
    const probabilities = {};
    let sum = 0;
    for (const [name, value] of Object.entries(probsDoc)) {
        const p = asFiniteNumber(value, `probabilities[${JSON.stringify(name)}]`);
        if (p < 0 || p > 1) {
            throw new MalformedPayload(`probability for ${JSON.stringify(name)} outside [0, 1]`);
        }
        probabilities[name] = p;
        sum += p;
    }
    const names = Object.keys(probabilities);
    if (names.length === 0) {
        throw new MalformedPayload("probabilities is empty");
    }
    if (Math.abs(sum - 1) > 1e-3) {
        throw new MalformedPayload(`probabilities sum to ${sum.toFixed(6)}, expected 1`);
    }
    const label = asString(doc.label, "label");
    if (!(label in probabilities)) {
        throw new MalformedPayload(`label ${JSON.stringify(label)} has no probability entry`);
    }
    return {
        scheme: asString(doc.scheme, "scheme"),
        label,
        probabilities,
        model_version: asString(doc.model_version, "model_version"),
        processing_ms: asFiniteNumber(doc.processing_ms, "processing_ms"),
        disease_info: parseDiseaseInfo(doc.disease_info),
    };
}
export function parseHealth(raw) {
    const doc = asRecord(raw, "health");
    return {
        status: asString(doc.status, "status"),
        model_version: asString(doc.model_version, "model_version"),
        backend: asString(doc.backend, "backend"),
        scheme: asString(doc.scheme, "scheme"),
        uptime_s: asFiniteNumber(doc.uptime_s, "uptime_s"),
    };
}
function decodeJson(reply) {
    try {
        return JSON.parse(reply.body);
    }
    catch {
        if (reply.status >= 200 && reply.status < 300) {
            throw new MalformedPayload("server reply is not valid JSON");
        }
        throw new ApiError(reply.status, "UnknownError", reply.body.slice(0, 200));
    }
}
/** Raise ApiError for non-2xx replies, otherwise hand back the parsed JSON. */
function unwrap(reply) {
    const doc = decodeJson(reply);
    if (reply.status >= 200 && reply.status < 300) {
        return doc;
    }
    const body = typeof doc === "object" && doc !== null ? doc : {};
    const code = typeof body.error === "string" ? body.error : "UnknownError";
    const detail = typeof body.detail === "string" ? body.detail : reply.body.slice(0, 200);
    throw new ApiError(reply.status, code, detail);
}
export class ApiClient {
    baseUrl;
    transport;
    constructor(baseUrl, transport) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
        this.transport = transport;
    }
    async predict(file, onProgress = () => { }) {
        const reply = await this.transport.postFile(`${this.baseUrl}/api/v1/predict`, file, onProgress);
        return parsePrediction(unwrap(reply));
    }
    async disease(label) {
        const reply = await this.transport.getJson(`${this.baseUrl}/api/v1/diseases/${encodeURIComponent(label)}`);
        return parseDiseaseInfo(unwrap(reply));
    }
    async health() {
        const reply = await this.transport.getJson(`${this.baseUrl}/api/v1/health`);
        return parseHealth(unwrap(reply));
    }
}
