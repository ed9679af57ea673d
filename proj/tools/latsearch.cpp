#include "latsearch/cli.hpp"

int main(int argc, char** argv) { return latsearch::run_cli(argc, argv); }
