#include "specklab/cli.hpp"

int main(int argc, char** argv) { return specklab::cli::dispatch(argc, argv); }
