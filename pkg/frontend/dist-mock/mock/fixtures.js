/** Canned response documents for the mock analysis server.
 *
 * Shapes mirror the real service's JSON contract exactly; values are frozen
 * so tests can assert against them.
 */
const RETRIEVED_AT = "2026-01-15T10:30:00+00:00";
export const copdPrediction = {
    scheme: "healthy_copd_others",
    label: "COPD",
    probabilities: { Healthy: 0.2, COPD: 0.7, others: 0.1 },
    model_version: "vxmd-v1",
    processing_ms: 42.0,
    disease_info: {
        name: "COPD",
        summary: "Chronic obstructive pulmonary disease: persistent airflow limitation, " +
            "usually progressive and associated with long-term exposure to irritants " +
            "such as tobacco smoke.",
        symptoms: [
            "shortness of breath",
            "chronic cough",
            "sputum production",
            "wheezing",
            "chest tightness",
        ],
        source: "bundled",
        retrieved_at: RETRIEVED_AT,
    },
};
export const healthyPrediction = {
    scheme: "healthy_copd_others",
    label: "Healthy",
    probabilities: { Healthy: 0.85, COPD: 0.05, others: 0.1 },
    model_version: "vxmd-v1",
    processing_ms: 38.0,
    disease_info: {
        name: "Healthy",
        summary: "No respiratory ailment detected in this recording. Lung sounds are " +
            "consistent with normal breathing.",
        symptoms: [],
        source: "bundled",
        retrieved_at: RETRIEVED_AT,
    },
};
export const diseases = {
    copd: copdPrediction.disease_info,
    healthy: healthyPrediction.disease_info,
    others: {
        name: "Other respiratory condition",
        summary: "The recording matches a respiratory condition outside the named classes " +
            "of this model. Clinical follow-up is advised.",
        symptoms: ["cough", "abnormal breath sounds", "breathlessness"],
        source: "bundled",
        retrieved_at: RETRIEVED_AT,
    },
};
export const healthReport = {
    status: "ok",
    model_version: "vxmd-v1",
    backend: "deterministic_test",
    scheme: "healthy_copd_others",
};
