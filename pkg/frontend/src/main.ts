import { fetchModels, resolveApiBase, type ModelInfo } from "./api.js";
import { debounce } from "./debounce.js";
import { SearchStore } from "./state.js";
import { render, type Handlers } from "./ui.js";

const base = resolveApiBase(window.location.search, document);
const store = new SearchStore(base);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

let models: ModelInfo[] = [];

const handlers: Handlers = {
  onInput: debounce((query: string) => void store.search(query), 300),
  onModel: (id) => store.setModel(id),
  onCopy: (code) => void window.navigator.clipboard?.writeText(code),
};

store.subscribe((state) => render(root, state, models, handlers));
render(root, store.getState(), models, handlers);

fetchModels(base)
  .then((list) => {
    models = list;
    const first = list[0];
    if (first) store.setModel(first.id);
    else store.announceError("service reports no models");
  })
  .catch(() => store.announceError("could not load the model list"));
