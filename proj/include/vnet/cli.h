// vnet/cli.h

// Copyright 2026  The vnet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VNET_CLI_H_
#define VNET_CLI_H_

#include <string>
#include <vector>

namespace vnet {
namespace cli {

// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 check failure (gradcheck).
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckFailed = 3;

// Runs one `vnet` invocation. argv[0] is the program name.
int Run(int argc, const char *const *argv);
int Run(const std::vector<std::string> &args);

}  // namespace cli
}  // namespace vnet

#endif  // VNET_CLI_H_
