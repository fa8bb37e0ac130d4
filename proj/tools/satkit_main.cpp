#include <cstdio>

int main() {
  std::puts("satkit: not wired up yet");
  return 64;
}
