#include "ncal/cli.hpp"

int main(int argc, char** argv) { return ncal::cli_dispatch(argc, argv); }
