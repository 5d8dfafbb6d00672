#include <sandpile/io/cli.hpp>

int main(int argc, char** argv) { return sandpile::io::cli_dispatch(argc, argv); }
