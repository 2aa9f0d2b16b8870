/** Standalone mock of the VoxMed analysis service.
 *
 * Implements the three JSON endpoints the UI consumes with canned fixtures,
 * so the front end can be developed and tested without the real model. The
 * prediction endpoint checks only that the upload looks like a RIFF/WAVE
 * container; anything else earns the same typed 400 the real parser returns.
 *
 * Every request is appended to `app.locals.log` so tests can assert when the
 * page does (and does not) touch the network. CORS is wide open: this server
 * exists for development and tests only.
 */

import Busboy from "busboy";
import express from "express";
import { copdPrediction, diseases, healthReport, healthyPrediction } from "./fixtures.js";

export const MAX_UPLOAD_BYTES = 25 * 1024 * 1024;

export interface RequestLogEntry {
  method: string;
  path: string;
}

interface UploadedFile {
  filename: string;
  bytes: Buffer;
  truncated: boolean;
}

function readUpload(req: express.Request): Promise<UploadedFile | null> {
  return new Promise((resolve, reject) => {
    let upload: UploadedFile | null = null;
    let bb: ReturnType<typeof Busboy>;
    try {
      bb = Busboy({ headers: req.headers, limits: { fileSize: MAX_UPLOAD_BYTES } });
    } catch (err) {
      reject(err);
      return;
    }
    bb.on("file", (field, stream, info) => {
      if (field !== "audio") {
        stream.resume();
        return;
      }
      const chunks: Buffer[] = [];
      stream.on("data", (chunk: Buffer) => chunks.push(chunk));
      stream.on("close", () => {
        upload = {
          filename: info.filename ?? "",
          bytes: Buffer.concat(chunks),
          truncated: stream.truncated === true,
        };
      });
    });
    bb.on("close", () => resolve(upload));
    bb.on("error", reject);
    req.pipe(bb);
  });
}

export function createMockApp(): express.Express {
  const app = express();
  const log: RequestLogEntry[] = [];
  app.locals.log = log;

  app.use((req, res, next) => {
    log.push({ method: req.method, path: req.path });
    res.setHeader("Access-Control-Allow-Origin", "*");
    if (req.method === "OPTIONS") {
      res.setHeader("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.setHeader("Access-Control-Allow-Headers", "*");
      res.status(204).end();
      return;
    }
    next();
  });

  app.post("/api/v1/predict", async (req, res) => {
    let upload: UploadedFile | null;
    try {
      upload = await readUpload(req);
    } catch {
      res.status(400).json({ error: "MalformedHeader", detail: "unreadable multipart body" });
      return;
    }
    if (upload === null) {
      res.status(400).json({ error: "MalformedHeader", detail: 'missing multipart field "audio"' });
      return;
    }
    if (upload.truncated) {
      res.status(413).json({
        error: "PayloadTooLarge",
        detail: `upload exceeds ${MAX_UPLOAD_BYTES} bytes`,
      });
      return;
    }
    if (upload.bytes.length < 12 || upload.bytes.toString("latin1", 0, 4) !== "RIFF") {
      res.status(400).json({
        error: "MalformedHeader",
        detail: "expected RIFF/WAVE container, got something else",
      });
      return;
    }
    // Canned result: a name containing "healthy" selects the healthy fixture
    // so both response shapes are reachable from the demo page.
    const fixture = upload.filename.toLowerCase().includes("healthy")
      ? healthyPrediction
      : copdPrediction;
    res.json(fixture);
  });

  app.get("/api/v1/diseases/:label", (req, res) => {
    const info = diseases[req.params.label.trim().toLowerCase()];
    if (info === undefined) {
      res.status(404).json({
        error: "UnknownDisease",
        detail: `no disease information available for '${req.params.label}'`,
      });
      return;
    }
    res.json(info);
  });

  app.get("/api/v1/health", (_req, res) => {
    res.json({ ...healthReport, uptime_s: process.uptime() });
  });

  return app;
}
