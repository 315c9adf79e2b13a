/*
 * Copyright (c) dskip contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "dskip/bloom.hpp"
#include "dskip/builtin_filters.hpp"
#include "dskip/clause.hpp"
#include "dskip/clause_eval.hpp"
#include "dskip/collect.hpp"
#include "dskip/csv.hpp"
#include "dskip/datagen.hpp"
#include "dskip/descriptor.hpp"
#include "dskip/engine.hpp"
#include "dskip/errors.hpp"
#include "dskip/eval.hpp"
#include "dskip/expr.hpp"
#include "dskip/filters.hpp"
#include "dskip/like.hpp"
#include "dskip/literal.hpp"
#include "dskip/merge.hpp"
#include "dskip/metadata.hpp"
#include "dskip/metastore.hpp"
#include "dskip/parallel.hpp"
#include "dskip/parser.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"
#include "dskip/unicode.hpp"
#include "dskip/wkt.hpp"
