// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { DISCLAIMER, initApp, type App } from "../src/app.js";
import { TransportError } from "../src/transport.js";
import { copdPrediction, healthyPrediction } from "../mock/fixtures.js";
import { chooseFile, FakeTransport, wavFile } from "./helpers.js";

let root: HTMLElement;
let transport: FakeTransport;
let app: App;

function fileInput(): HTMLInputElement {
  return root.querySelector(".file-input") as HTMLInputElement;
}

function submitButton(): HTMLButtonElement {
  return root.querySelector(".submit-button") as HTMLButtonElement;
}

beforeEach(() => {
  document.body.innerHTML = "<div id='app'></div>";
  root = document.getElementById("app") as HTMLElement;
  transport = new FakeTransport();
  transport.reply = { status: 200, body: JSON.stringify(copdPrediction) };
  app = initApp(root, new ApiClient("", transport));
});

describe("initial page", () => {
  it("renders the disclaimer before anything happens", () => {
    expect(root.querySelector(".disclaimer")?.textContent).toBe(DISCLAIMER);
    expect(DISCLAIMER).toContain("not a medical diagnosis");
  });

  it("disables submit until a file is chosen", () => {
    expect(submitButton().disabled).toBe(true);
    expect(app.state().phase).toBe("idle");
  });

  it("makes no network requests on load", () => {
    expect(transport.posts).toHaveLength(0);
    expect(transport.gets).toHaveLength(0);
  });
});

describe("selecting a file", () => {
  it("enables submit and shows the name, still without network traffic", () => {
    chooseFile(fileInput(), wavFile("morning_session.wav"));
    expect(app.state().phase).toBe("selected");
    expect(root.querySelector(".file-name")?.textContent).toBe("morning_session.wav");
    expect(submitButton().disabled).toBe(false);
    expect(transport.posts).toHaveLength(0);
    expect(transport.gets).toHaveLength(0);
  });
});

describe("uploading", () => {
  it("disables the controls and shows intermediate progress while in flight", async () => {
    transport.progressPlan = [0.45];
    transport.hold();
    chooseFile(fileInput(), wavFile());
    submitButton().click();

    expect(app.state().phase).toBe("uploading");
    expect(app.state().progress).toBe(0.45);
    expect(app.state().progress).toBeGreaterThan(0);
    expect(app.state().progress).toBeLessThan(1);
    expect(submitButton().disabled).toBe(true);
    expect(fileInput().disabled).toBe(true);
    const progress = root.querySelector<HTMLElement>(".progress");
    expect(progress?.hidden).toBe(false);
    expect(root.querySelector(".progress-text")?.textContent).toContain("45%");

    transport.release();
    await app.inflight;
    expect(app.state().phase).toBe("done");
  });

  it("sends exactly one request per submit", async () => {
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(transport.posts).toHaveLength(1);
    expect(transport.posts[0].url).toBe("/api/v1/predict");
    expect(transport.posts[0].file.name).toBe("clip.wav");
  });

  it("renders the label, bars, and model version when done", async () => {
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(root.querySelector(".predicted-label")?.textContent).toBe("COPD");
    expect(root.querySelectorAll(".prob-row")).toHaveLength(3);
    const modelLine = root.querySelector<HTMLElement>(".model-line");
    expect(modelLine?.hidden).toBe(false);
    expect(root.querySelector(".model-version")?.textContent).toBe("vxmd-v1");
    expect(submitButton().disabled).toBe(false);
    expect(fileInput().disabled).toBe(false);
  });

  it("stores nothing in web storage", async () => {
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(window.localStorage.length).toBe(0);
    expect(window.sessionStorage.length).toBe(0);
  });
});

describe("failures", () => {
  it("shows an unsupported-file error for a 400 without a retry button", async () => {
    transport.reply = {
      status: 400,
      body: JSON.stringify({ error: "MalformedHeader", detail: "expected RIFF/WAVE container" }),
    };
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(app.state().phase).toBe("error");
    const message = root.querySelector(".error-message")?.textContent ?? "";
    expect(message).toContain("Unsupported audio file");
    expect(message).toContain("MalformedHeader");
    expect(root.querySelector(".retry-button")).toBeNull();
  });

  it("offers retry after a network failure, and retry can succeed", async () => {
    transport.failWith = new TransportError("connection refused");
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(app.state().phase).toBe("error");
    expect(app.state().canRetry).toBe(true);

    transport.failWith = null;
    root.querySelector<HTMLButtonElement>(".retry-button")?.click();
    await app.inflight;
    expect(app.state().phase).toBe("done");
    expect(root.querySelector(".predicted-label")?.textContent).toBe("COPD");
    expect(transport.posts).toHaveLength(2);
  });

  it("clears the previous result when uploading again", async () => {
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    expect(root.querySelector(".predicted-label")?.textContent).toBe("COPD");

    transport.reply = { status: 200, body: JSON.stringify(healthyPrediction) };
    chooseFile(fileInput(), wavFile("healthy_followup.wav"));
    expect(root.querySelector(".result")).toBeNull();
    expect(root.querySelector<HTMLElement>(".model-line")?.hidden).toBe(true);

    submitButton().click();
    await app.inflight;
    expect(root.querySelector(".predicted-label")?.textContent).toBe("Healthy");
  });

  it("can re-analyze the same file after completion", async () => {
    chooseFile(fileInput(), wavFile());
    submitButton().click();
    await app.inflight;
    submitButton().click();
    await app.inflight;
    expect(transport.posts).toHaveLength(2);
    expect(app.state().phase).toBe("done");
  });
});
