#include "spinflow/cli.hpp"
int main() { return 0; }
