import { afterAll, beforeAll, describe, expect, it } from "vitest";
import type { Server } from "node:http";
import { parseHealth, parsePrediction } from "../src/api.js";
import { createMockApp, MAX_UPLOAD_BYTES, type RequestLogEntry } from "../mock/app.js";
import { fakeWavBytes } from "./helpers.js";

let server: Server;
let base = "";
let log: RequestLogEntry[];

beforeAll(async () => {
  const app = createMockApp();
  log = app.locals.log as RequestLogEntry[];
  await new Promise<void>((resolve) => {
    server = app.listen(0, "127.0.0.1", () => {
      const { port } = server.address() as { port: number };
      base = `http://127.0.0.1:${port}`;
      resolve();
    });
  });
});

afterAll(() => {
  server?.close();
});

function upload(bytes: Uint8Array<ArrayBuffer>, name: string): Promise<Response> {
  const form = new FormData();
  form.append("audio", new Blob([bytes], { type: "audio/wav" }), name);
  return fetch(`${base}/api/v1/predict`, { method: "POST", body: form });
}

describe("POST /api/v1/predict", () => {
  it("returns a parseable prediction for a RIFF/WAVE upload", async () => {
    const resp = await upload(fakeWavBytes(4096), "clip.wav");
    expect(resp.status).toBe(200);
    const result = parsePrediction(await resp.json());
    expect(result.label).toBe("COPD");
    expect(result.scheme).toBe("healthy_copd_others");
    expect(Object.keys(result.probabilities)).toHaveLength(3);
  });

  it("selects the healthy fixture for file names containing 'healthy'", async () => {
    const resp = await upload(fakeWavBytes(4096), "healthy_baseline.wav");
    expect(resp.status).toBe(200);
    const result = parsePrediction(await resp.json());
    expect(result.label).toBe("Healthy");
    expect(result.disease_info.symptoms).toEqual([]);
  });

  it("rejects non-RIFF bytes with a typed 400", async () => {
    const resp = await upload(new TextEncoder().encode("id3 tag soup"), "song.mp3");
    expect(resp.status).toBe(400);
    const body = await resp.json();
    expect(body.error).toBe("MalformedHeader");
    expect(body.detail).toContain("RIFF");
  });

  it("rejects a missing audio field with a typed 400", async () => {
    const form = new FormData();
    form.append("note", "no file here");
    const resp = await fetch(`${base}/api/v1/predict`, { method: "POST", body: form });
    expect(resp.status).toBe(400);
    expect((await resp.json()).error).toBe("MalformedHeader");
  });

  it("rejects uploads beyond the size cap with 413", async () => {
    const resp = await upload(fakeWavBytes(MAX_UPLOAD_BYTES + 1024), "marathon.wav");
    expect(resp.status).toBe(413);
    expect((await resp.json()).error).toBe("PayloadTooLarge");
  });
});

describe("GET /api/v1/diseases/{label}", () => {
  it("serves bundled info case-insensitively", async () => {
    const resp = await fetch(`${base}/api/v1/diseases/COPD`);
    expect(resp.status).toBe(200);
    const body = await resp.json();
    expect(body.name).toBe("COPD");
    expect(body.source).toBe("bundled");
  });

  it("404s with a typed error for unknown labels", async () => {
    const resp = await fetch(`${base}/api/v1/diseases/dragonpox`);
    expect(resp.status).toBe(404);
    expect((await resp.json()).error).toBe("UnknownDisease");
  });
});

describe("GET /api/v1/health", () => {
  it("reports ok with model and scheme identifiers", async () => {
    const resp = await fetch(`${base}/api/v1/health`);
    expect(resp.status).toBe(200);
    const health = parseHealth(await resp.json());
    expect(health.status).toBe("ok");
    expect(health.model_version).toBe("vxmd-v1");
    expect(health.scheme).toBe("healthy_copd_others");
  });
});

describe("request log", () => {
  it("records every request for the no-traffic assertions", async () => {
    const before = log.length;
    await fetch(`${base}/api/v1/health`);
    expect(log.length).toBe(before + 1);
    expect(log[log.length - 1]).toEqual({ method: "GET", path: "/api/v1/health" });
  });
});
