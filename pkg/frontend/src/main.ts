/** Browser entry point.
 *
 * The API base URL defaults to the page's own origin (empty prefix) and can
 * be pointed elsewhere with a query parameter, e.g. ?api=http://localhost:8080
 */

import { ApiClient } from "./api.js";
import { initApp } from "./app.js";
import { XhrUploadTransport } from "./transport.js";

function apiBaseUrl(): string {
  return new URLSearchParams(window.location.search).get("api") ?? "";
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error('missing <div id="app"> mount point');
}
initApp(root, new ApiClient(apiBaseUrl(), new XhrUploadTransport()));
