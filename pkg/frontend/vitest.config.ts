import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 60000,
    hookTimeout: 120000,
    // the e2e walk is stateful; keep files and tests sequential
    fileParallelism: false,
    sequence: { concurrent: false },
  },
});
