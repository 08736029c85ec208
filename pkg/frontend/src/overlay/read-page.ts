import { AgentClient } from "../agent-client";
import { createParentChannel } from "./common";
import { initReadOverlay } from "./read";

initReadOverlay(document, new AgentClient(window.location.origin), createParentChannel(window));
