#include "spinflow/cli.hpp"

int main(int argc, char** argv) { return spinflow::cli::run(argc, argv); }
