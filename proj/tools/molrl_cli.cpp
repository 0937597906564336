//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Placeholder main; subcommands are added together with the library modules.
int main() { return 0; }
