import { ConsoleApp } from "./app.js";

const mount = document.getElementById("root");
if (!mount) {
  throw new Error("missing #root element");
}
new ConsoleApp(mount);
