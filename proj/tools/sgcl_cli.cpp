#include "sgcl/cli.hpp"

int main(int argc, char** argv) { return sgcl::run_cli(argc, argv); }
