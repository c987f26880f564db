import { ApiClient } from "./api.js";
import { MosApp } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  new MosApp(root, new ApiClient(""), document).start();
}
