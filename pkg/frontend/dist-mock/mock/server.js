/** Launcher: mock API plus static hosting for the built UI.
 *
 *   npm run build && npm run mock-server
 *   → http://localhost:8081/
 *
 * PORT overrides the default 8081 (the real service usually owns 8080).
 */
import path from "node:path";
import { fileURLToPath } from "node:url";
import express from "express";
import { createMockApp } from "./app.js";
const port = Number(process.env.PORT ?? 8081);
const app = createMockApp();
// Serve index.html, styles.css, and dist/ from the package root. The compiled
// copy of this file lives one directory deeper, hence the double dirname.
const here = path.dirname(fileURLToPath(import.meta.url));
const root = path.resolve(here, "..", "..");
app.use(express.static(root));
app.listen(port, () => {
    console.log(`mock VoxMed service + UI on http://localhost:${port}/`);
});
