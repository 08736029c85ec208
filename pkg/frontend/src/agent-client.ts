/** Thin client for the localhost agent's crypto API. */

export interface RemediationField {
  field_name: string;
  label: string;
  input_kind: string;
  required: boolean;
}

export interface Remediation {
  title: string;
  fields: RemediationField[];
}

export class AgentError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly remediation: Remediation | null = null,
  ) {
    super(message);
  }

  get locked(): boolean {
    return this.status === 423;
  }
}

export interface PackageRequest {
  plaintext_html: string;
  recipients?: string[];
  scheme?: string;
  label?: string;
  fingerprint?: string;
  password?: string;
}

export interface KeySystemInfo {
  scheme_id: number;
  fingerprint: string;
  identity: string;
  label: string;
}

type FetchLike = typeof fetch;

/** What overlay pages need from the agent; AgentClient is the real one. */
export interface AgentApi {
  unlock(masterPassword: string): Promise<void>;
  keysystems(): Promise<KeySystemInfo[]>;
  packageMessage(request: PackageRequest): Promise<string>;
  unpackage(armored: string): Promise<{
    plaintext_html: string;
    scheme_id: number;
    fingerprint: string;
  }>;
  postBench(record: {
    browser_label: string;
    stage: number;
    n: number;
    total_ms: number;
    per_element_ms: number;
  }): Promise<void>;
}

export class AgentClient implements AgentApi {
  private token: string | null = null;

  constructor(
    readonly origin: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<unknown> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...(init.headers as Record<string, string> | undefined),
    };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.origin}${path}`, { ...init, headers });
    const text = await response.text();
    let body: Record<string, unknown> = {};
    try {
      body = text ? JSON.parse(text) : {};
    } catch {
      body = {};
    }
    if (!response.ok) {
      throw new AgentError(
        response.status,
        String(body.code ?? "Error"),
        String(body.message ?? response.statusText),
        (body.remediation as Remediation | undefined) ?? null,
      );
    }
    return body;
  }

  get unlocked(): boolean {
    return this.token !== null;
  }

  async unlock(masterPassword: string): Promise<void> {
    const body = (await this.request("/api/unlock", {
      method: "POST",
      body: JSON.stringify({ master_password: masterPassword }),
    })) as { session_token: string };
    this.token = body.session_token;
  }

  async keysystems(): Promise<KeySystemInfo[]> {
    const body = (await this.request("/api/keysystems")) as { systems: KeySystemInfo[] };
    return body.systems;
  }

  async packageMessage(request: PackageRequest): Promise<string> {
    const body = (await this.request("/api/package", {
      method: "POST",
      body: JSON.stringify(request),
    })) as { armored: string };
    return body.armored;
  }

  async unpackage(armored: string): Promise<{
    plaintext_html: string;
    scheme_id: number;
    fingerprint: string;
  }> {
    return (await this.request("/api/unpackage", {
      method: "POST",
      body: JSON.stringify({ armored }),
    })) as { plaintext_html: string; scheme_id: number; fingerprint: string };
  }

  async postBench(record: {
    browser_label: string;
    stage: number;
    n: number;
    total_ms: number;
    per_element_ms: number;
  }): Promise<void> {
    await this.request("/api/bench", { method: "POST", body: JSON.stringify(record) });
  }
}
