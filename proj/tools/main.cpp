#include "cadeval/cli.hpp"

int main(int argc, char** argv) { return cadeval::dispatch(argc, argv); }
