#
# Copyright (c) 2026 The qcivet Authors. All Rights Reserved.
# This file is a part of the qcivet project.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

def main():
    """Entry point of the ``qcivet`` console script."""
    from qcivet.cli import main as cli_main
    return cli_main()
