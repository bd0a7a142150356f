import { Api } from "./api.js";
import { Workbench } from "./app.js";

const workbench = new Workbench(new Api(""));
workbench.start().catch((failure) => {
  const notice = document.getElementById("notice");
  if (notice) notice.textContent = `failed to start: ${failure}`;
});
