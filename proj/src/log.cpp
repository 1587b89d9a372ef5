// src/log.cpp
//
// Copyright 2026  The robunits Authors
//
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

#include "robunits/log.hpp"

#include <iostream>
#include <mutex>

namespace robunits {
namespace {

std::mutex g_sink_mutex;

void stderr_sink(LogLevel level, const std::string& msg) {
  std::cerr << (level == LogLevel::kWarning ? "WARNING: " : "") << msg << '\n';
}

LogSink& sink() {
  static LogSink s = stderr_sink;
  return s;
}

void emit(LogLevel level, const std::string& msg) {
  std::lock_guard lock(g_sink_mutex);
  if (sink()) sink()(level, msg);
}

}  // namespace

LogSink set_log_sink(LogSink s) {
  std::lock_guard lock(g_sink_mutex);
  LogSink old = std::move(sink());
  sink() = std::move(s);
  return old;
}

void log_info(const std::string& msg) { emit(LogLevel::kInfo, msg); }
void log_warning(const std::string& msg) { emit(LogLevel::kWarning, msg); }

}  // namespace robunits
