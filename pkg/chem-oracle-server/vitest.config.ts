import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    fileParallelism: false, // share the on-disk test library and both cores
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
