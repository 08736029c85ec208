import { AgentClient } from "../agent-client";
import { createParentChannel } from "./common";
import { initComposeOverlay } from "./compose";

initComposeOverlay(
  document, new AgentClient(window.location.origin), createParentChannel(window),
);
