// Browser entry point. The API base defaults to same-origin so the built
// bundle can be served next to the review service behind one proxy.

import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const base = (window as { CXRBOARD_API?: string }).CXRBOARD_API ?? "";
const root = document.getElementById("app");
if (root) {
  const app = createApp(root, { client: new ApiClient(base), window });
  void app.boot();
}
