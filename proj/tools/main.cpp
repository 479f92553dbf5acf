#include "postsel/cli.hpp"

int main(int argc, char** argv) { return postsel::cli::run(argc, argv); }
