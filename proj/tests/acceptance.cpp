#include <cstdio>
int main() { std::printf("acceptance: pending\n"); return 1; }
