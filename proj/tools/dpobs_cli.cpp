#include "dpobs/cli.hpp"

int main(int argc, char** argv) { return dpobs::run_cli(argc, argv); }
