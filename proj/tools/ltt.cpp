#include "ltt/cli.hpp"

int main(int argc, char** argv) { return ltt::parse_and_dispatch(argc, argv); }
