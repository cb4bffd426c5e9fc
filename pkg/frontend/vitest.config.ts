import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      happyDOM: {
        // the API under test runs on another local port
        settings: { fetch: { disableSameOriginPolicy: true } },
      },
    },
    globalSetup: "./tests/globalSetup.ts",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 120_000,
  },
});
