import { ApiClient } from "./api.js";
import { JobsPage, ResultPage, SubmitPage, View } from "./views.js";

const api = new ApiClient();
let current: View | null = null;

function route(): View {
  const hash = location.hash || "#/submit";
  const result = hash.match(/^#\/jobs\/([\w-]+)$/);
  if (result) return new ResultPage(api, result[1]);
  if (hash === "#/jobs") return new JobsPage(api);
  return new SubmitPage(api);
}

function navigate(): void {
  const root = document.getElementById("app");
  if (!root) return;
  current?.unmount();
  current = route();
  current.mount(root);
  for (const link of document.querySelectorAll("nav a")) {
    link.classList.toggle("current", link.getAttribute("href") === (location.hash || "#/submit"));
  }
}

window.addEventListener("hashchange", navigate);
window.addEventListener("DOMContentLoaded", navigate);
