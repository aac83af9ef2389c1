import { describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { entry, frame, jsonResponse } from "./helpers";

describe("ApiClient", () => {
  test("builds query strings and parses JSON", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://api", (url) => {
      urls.push(url);
      return Promise.resolve(jsonResponse(frame([entry()])));
    });
    const payload = await client.frame({ mode: "total", vars: "confirmed" });
    expect(urls).toEqual(["http://api/api/frame?mode=total&vars=confirmed"]);
    expect(payload.entries).toHaveLength(1);
  });

  test("raises ApiError with the server detail", async () => {
    const client = new ApiClient("", () =>
      Promise.resolve(jsonResponse({ detail: "window 9 > range length 5" }, 422)));
    await expect(client.frame({})).rejects.toThrowError(ApiError);
    await expect(client.frame({})).rejects.toThrow(/window 9 > range length 5/);
  });

  test("meta and regions hit their endpoints", async () => {
    const urls: string[] = [];
    const client = new ApiClient("", (url) => {
      urls.push(url);
      return Promise.resolve(jsonResponse(url.includes("regions") ? [] : {}));
    });
    await client.meta();
    await client.regions("country", "isr");
    expect(urls).toEqual(["/api/meta", "/api/regions?level=country&q=isr"]);
  });

  test("records every request for single-source-of-truth audits", async () => {
    const client = new ApiClient("", () => Promise.resolve(jsonResponse({})));
    await client.meta();
    await client.pick({ lat: "1", lon: "2" });
    expect(client.requests).toHaveLength(2);
  });
});
