#include "sax/cli.hpp"

int main(int argc, char** argv) { return sax::run_cli(argc, argv); }
