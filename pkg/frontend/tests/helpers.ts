import type { FactorInfo, SampleResponse } from "../src/api.js";

/** Canonical factor list, spelled out independently of the service. */
export const FACTORS: FactorInfo[] = [
  ["supply_chain_and_product", "Supply Chain and Product", "Supp"],
  ["people_and_management", "People and Management", "Mgmt"],
  ["finance", "Finance", "Fin"],
  ["legal_and_regulations", "Legal and Regulations", "Legal"],
  ["macro", "Macro", "Macro"],
  ["competition", "Competition", "Comp"],
  ["markets_and_consumers", "Markets and Consumers", "Mrkt"],
].map(([name, display_name, short_code], index) => ({
  name,
  display_name,
  short_code,
  description: `${display_name} risks`,
  index,
}));

export function sampleFixture(overrides: Partial<SampleResponse> = {}): SampleResponse {
  const headline = "Acme Warns of Supply Risk";
  const sentences = ["Shipments from Acme slipped.", "Costs rose."];
  return {
    sample_id: "a1:acme",
    article_id: "a1",
    company_id: "acme",
    company_name: "Acme",
    headline,
    sentences,
    truncated_text: [headline, ...sentences].join(" "),
    ...overrides,
  };
}

type JsonBody = object | unknown[];

/** Minimal fetch stub: route table keyed by "METHOD path-prefix". */
export function fetchStub(
  routes: Record<string, (body?: unknown) => { status?: number; json?: JsonBody; text?: string }>,
  log: { url: string; method: string; body?: unknown }[] = [],
) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    log.push({ url, method, body });
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    for (const [key, handler] of Object.entries(routes)) {
      const [routeMethod, prefix] = key.split(" ", 2);
      if (method === routeMethod && path.startsWith(prefix)) {
        const result = handler(body);
        const status = result.status ?? 200;
        const payload = result.text ?? JSON.stringify(result.json ?? {});
        return new Response(payload, {
          status,
          headers: { "Content-Type": result.text ? "text/plain" : "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no stub for ${method} ${path}` }), {
      status: 404,
    });
  };
}
