/** Browser entry point: boots the app against the configured API base URL. */

import { ApiClient } from "./api.js";
import { initApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";
const root = document.getElementById("app");
if (root !== null) {
  initApp(root, new ApiClient(base));
}
