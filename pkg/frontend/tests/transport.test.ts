// @vitest-environment jsdom
import { afterEach, describe, expect, it, vi } from "vitest";
import { TransportError, XhrUploadTransport } from "../src/transport.js";

interface FakeProgressEvent {
  lengthComputable: boolean;
  loaded: number;
  total: number;
}

/** Scriptable stand-in for XMLHttpRequest capturing what the transport sends. */
class FakeXhr {
  static instances: FakeXhr[] = [];

  method = "";
  url = "";
  sentBody: unknown = null;
  responseType = "";
  status = 0;
  responseText = "";
  timeout = 0;
  upload: { onprogress: ((event: FakeProgressEvent) => void) | null } = { onprogress: null };
  onload: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onabort: (() => void) | null = null;
  ontimeout: (() => void) | null = null;

  constructor() {
    FakeXhr.instances.push(this);
  }

  static last(): FakeXhr {
    return FakeXhr.instances[FakeXhr.instances.length - 1];
  }

  open(method: string, url: string): void {
    this.method = method;
    this.url = url;
  }

  send(body?: unknown): void {
    this.sentBody = body ?? null;
  }
}

function install(): void {
  FakeXhr.instances = [];
  vi.stubGlobal("XMLHttpRequest", FakeXhr);
}

afterEach(() => {
  vi.unstubAllGlobals();
});

const wav = () => new File([new Uint8Array(64)], "clip.wav", { type: "audio/wav" });

describe("XhrUploadTransport.postFile", () => {
  it("POSTs multipart form data with the file under field 'audio'", async () => {
    install();
    const pending = new XhrUploadTransport().postFile("/api/v1/predict", wav(), () => {});
    const xhr = FakeXhr.last();
    expect(xhr.method).toBe("POST");
    expect(xhr.url).toBe("/api/v1/predict");
    expect(xhr.sentBody).toBeInstanceOf(FormData);
    const sent = (xhr.sentBody as FormData).get("audio");
    expect(sent).toBeInstanceOf(File);
    expect((sent as File).name).toBe("clip.wav");
    xhr.status = 200;
    xhr.responseText = "{}";
    xhr.onload?.();
    await expect(pending).resolves.toEqual({ status: 200, body: "{}" });
  });

  it("reports intermediate progress fractions for a 10 MB upload", async () => {
    install();
    const seen: number[] = [];
    const big = new File([new Uint8Array(10 * 1024 * 1024)], "long-recording.wav");
    const pending = new XhrUploadTransport().postFile("/api/v1/predict", big, (f) => seen.push(f));
    const xhr = FakeXhr.last();
    const total = 10 * 1024 * 1024;
    for (const loaded of [total * 0.3, total * 0.6, total]) {
      xhr.upload.onprogress?.({ lengthComputable: true, loaded, total });
    }
    xhr.status = 200;
    xhr.responseText = "{}";
    xhr.onload?.();
    await pending;
    expect(seen).toEqual([0.3, 0.6, 1]);
    expect(seen.some((f) => f > 0 && f < 1)).toBe(true);
  });

  it("ignores progress events without a computable length", async () => {
    install();
    const seen: number[] = [];
    const pending = new XhrUploadTransport().postFile("/u", wav(), (f) => seen.push(f));
    const xhr = FakeXhr.last();
    xhr.upload.onprogress?.({ lengthComputable: false, loaded: 5, total: 0 });
    xhr.status = 200;
    xhr.onload?.();
    await pending;
    expect(seen).toEqual([]);
  });

  it("clamps progress above 1", async () => {
    install();
    const seen: number[] = [];
    const pending = new XhrUploadTransport().postFile("/u", wav(), (f) => seen.push(f));
    const xhr = FakeXhr.last();
    xhr.upload.onprogress?.({ lengthComputable: true, loaded: 130, total: 100 });
    xhr.status = 200;
    xhr.onload?.();
    await pending;
    expect(seen).toEqual([1]);
  });

  it("rejects with TransportError on network failure", async () => {
    install();
    const pending = new XhrUploadTransport().postFile("/u", wav(), () => {});
    FakeXhr.last().onerror?.();
    await expect(pending).rejects.toBeInstanceOf(TransportError);
  });

  it("resolves (not rejects) on HTTP error statuses", async () => {
    install();
    const pending = new XhrUploadTransport().postFile("/u", wav(), () => {});
    const xhr = FakeXhr.last();
    xhr.status = 400;
    xhr.responseText = '{"error":"MalformedHeader","detail":"nope"}';
    xhr.onload?.();
    const reply = await pending;
    expect(reply.status).toBe(400);
    expect(reply.body).toContain("MalformedHeader");
  });
});

describe("XhrUploadTransport.getJson", () => {
  it("GETs the URL and resolves with the body", async () => {
    install();
    const pending = new XhrUploadTransport().getJson("/api/v1/health");
    const xhr = FakeXhr.last();
    expect(xhr.method).toBe("GET");
    expect(xhr.url).toBe("/api/v1/health");
    xhr.status = 200;
    xhr.responseText = '{"status":"ok"}';
    xhr.onload?.();
    await expect(pending).resolves.toEqual({ status: 200, body: '{"status":"ok"}' });
  });

  it("rejects with TransportError on abort", async () => {
    install();
    const pending = new XhrUploadTransport().getJson("/api/v1/health");
    FakeXhr.last().onabort?.();
    await expect(pending).rejects.toBeInstanceOf(TransportError);
  });
});
