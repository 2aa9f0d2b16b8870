/** Shared test utilities: canned files, a scriptable transport, seeded RNG. */

import type { TransportReply, UploadTransport } from "../src/transport.js";

/** Bytes that pass the mock server's RIFF/WAVE sniff. */
export function fakeWavBytes(totalBytes = 2048): Uint8Array<ArrayBuffer> {
  const bytes = new Uint8Array(Math.max(totalBytes, 12));
  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i += 1) {
      bytes[offset + i] = text.charCodeAt(i);
    }
  };
  ascii(0, "RIFF");
  const riffSize = bytes.length - 8;
  bytes[4] = riffSize & 0xff;
  bytes[5] = (riffSize >> 8) & 0xff;
  bytes[6] = (riffSize >> 16) & 0xff;
  bytes[7] = (riffSize >> 24) & 0xff;
  ascii(8, "WAVE");
  return bytes;
}

export function wavFile(name = "clip.wav", totalBytes = 2048): File {
  return new File([fakeWavBytes(totalBytes)], name, { type: "audio/wav" });
}

export function junkFile(name = "noise.bin"): File {
  return new File([new TextEncoder().encode("definitely not audio")], name, {
    type: "application/octet-stream",
  });
}

/** Set a file input's selection and fire its change event (jsdom-compatible). */
export function chooseFile(input: HTMLInputElement, file: File): void {
  Object.defineProperty(input, "files", { value: [file], configurable: true });
  input.dispatchEvent(new Event("change"));
}

/** Transport with scripted progress, replies, failures, and an optional gate
 * that holds the upload open so tests can observe the uploading phase. */
export class FakeTransport implements UploadTransport {
  posts: Array<{ url: string; file: File }> = [];
  gets: string[] = [];
  progressPlan: number[] = [];
  reply: TransportReply = { status: 200, body: "{}" };
  failWith: Error | null = null;
  private gate: Promise<void> | null = null;
  private openGate: (() => void) | null = null;

  hold(): void {
    this.gate = new Promise((resolve) => {
      this.openGate = resolve;
    });
  }

  release(): void {
    this.openGate?.();
    this.gate = null;
    this.openGate = null;
  }

  async postFile(
    url: string,
    file: File,
    onProgress: (fraction: number) => void,
  ): Promise<TransportReply> {
    this.posts.push({ url, file });
    for (const fraction of this.progressPlan) {
      onProgress(fraction);
    }
    if (this.gate) {
      await this.gate;
    }
    if (this.failWith) {
      throw this.failWith;
    }
    return this.reply;
  }

  async getJson(url: string): Promise<TransportReply> {
    this.gets.push(url);
    if (this.failWith) {
      throw this.failWith;
    }
    return this.reply;
  }
}

/** Small deterministic RNG for fuzz-style loops. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
