#include "mortal/cli.hpp"

int main(int argc, char** argv) { return mortal::cli_main(argc, argv); }
