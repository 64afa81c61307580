// Placeholder entry point; the real CLI lands with the pipeline module.
#include <cstdio>

int main() {
  std::printf("gridforge: pipeline CLI not wired up yet\n");
  return 1;
}
