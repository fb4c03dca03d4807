#pragma once

namespace ltt {

// Exit codes: 0 success, 1 runtime error, 2 usage error.
int parse_and_dispatch(int argc, char** argv);

}  // namespace ltt
